"""Simulator, estimator and policy engine for a day-sequenced campus placement market."""

from .errors import (ConfigurationError, DataError, DomainError, ParseError, PlacementError,
                     ValidationError)
from .market import (Caste, CovariateLayout, Degree, Job, Market, MarketConfig, OfferVector,
                     ParameterSet, Sector, Student)

__version__ = "0.1.0"

__all__ = [
    "Caste", "ConfigurationError", "CovariateLayout", "DataError", "Degree", "DomainError",
    "Job", "Market", "MarketConfig", "OfferVector", "ParameterSet", "ParseError",
    "PlacementError", "Sector", "Student", "ValidationError",
]
