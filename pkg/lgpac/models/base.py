"""This module defines the base classes shared by the lgpac data model."""

import json
import logging
from abc import abstractmethod

logger = logging.getLogger("flask.app")


class DataValidationError(Exception):
    """Base class for data validation errors when building or deserializing"""


class CompilationError(Exception):
    """Base class for errors raised while compiling a network"""


######################################################################
#  S E R I A L I Z A B L E   B A S E   M O D E L
######################################################################


class SerializableBase:
    """Base class that adds dictionary and JSON conversions"""

    @abstractmethod
    def serialize(self) -> dict:
        """Convert an object into a dictionary"""

    @classmethod
    @abstractmethod
    def deserialize(cls, data: dict):
        """Convert a dictionary into an object"""

    def to_json(self) -> str:
        """Serializes the object into a JSON document"""
        return json.dumps(self.serialize(), indent=2)

    @classmethod
    def from_json(cls, text: str):
        """Deserializes an object from a JSON document"""
        logger.debug("Loading %s from JSON", cls.__name__)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as error:
            logger.error("Invalid JSON for %s: %s", cls.__name__, error)
            raise DataValidationError(f"Invalid JSON: {error}") from error
        return cls.deserialize(data)
