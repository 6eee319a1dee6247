"""Small hand-built records shared by the unit tests."""

from placement import Caste, Degree, Job, Sector, Student


def student(caste=Caste.ADVANTAGED, degree=Degree.BTECH, gpa=0.0, entrance=0.0, q=0.0,
            n_experience=1, sid=1):
    return Student(id=sid, year=1, caste=caste, degree=degree, major="M1", gpa=gpa,
                   entrance_score=entrance, grade10=0.0, grade12=0.0,
                   experience=(0.0,) * n_experience, applications=(), stage_flags=(), q=q)


def job(sector=Sector.MANUFACTURING, wage=0.0, amenities=(0.0, 0.0), day=1, jid=1,
        firm="F01", designation="D1"):
    return Job(id=jid, firm=firm, designation=designation, year=1, sector=sector, wage=wage,
               amenities=tuple(amenities), client_facing=False, interview_day=day,
               hiring_cap=1.0)
