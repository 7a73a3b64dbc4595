"""Models package init file"""

from .base import CompilationError, DataValidationError
