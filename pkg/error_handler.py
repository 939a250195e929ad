"""
Centralized error handling for the ED degree toolkit
Exception hierarchy plus consistent logging, categorization and exit codes
"""

from typing import Optional, Callable

from constants import EXIT_CODES
from logger import logger


class EDDegError(Exception):
    """Base class for every error raised by the toolkit"""


class PolynomialSyntaxError(EDDegError):
    """Polynomial text does not follow the grammar"""

    def __init__(self, message: str, position: int, line: Optional[int] = None,
                 column: Optional[int] = None):
        self.position = position
        self.line = line
        self.column = column
        where = f"line {line}, column {column}" if line is not None else f"position {position}"
        super().__init__(f"{message} at {where}")

    def at_line(self, line: int, column_offset: int) -> "PolynomialSyntaxError":
        """Re-anchor a text position inside a problem file"""
        message = str(self.args[0]).rsplit(" at ", 1)[0]
        return type(self)(message, self.position, line, column_offset + self.position + 1)


class UnknownVariableError(PolynomialSyntaxError):
    pass


class NegativeExponentError(PolynomialSyntaxError):
    pass


class ZeroPolynomialError(EDDegError):
    """An operation needs a nonzero polynomial"""


class ZeroDirectionError(EDDegError):
    """A direction vector is identically zero"""


class DimensionMismatchError(EDDegError):
    """Vectors, polytopes or polynomials of incompatible sizes"""


class EmptyInputError(EDDegError):
    """Empty point set"""


class IndexOutOfRangeError(EDDegError):
    """Variable index outside 1..arity"""


class ConstantPolynomialError(EDDegError):
    """An equation of the ED problem is constant"""


class ProblemValidationError(EDDegError):
    """Problem file or problem tuple violates its invariants"""


class NonGenericLiftingError(EDDegError):
    """Every lifting tried induced a non-fine mixed subdivision"""

    def __init__(self, message: str, seeds_tried):
        self.seeds_tried = list(seeds_tried)
        super().__init__(f"{message} (seeds tried: {self.seeds_tried})")


class ErrorHandler:
    """Centralized error handling with consistent logging and recovery"""

    CATEGORIES = (
        ("parse", (PolynomialSyntaxError,)),
        ("validation", (ProblemValidationError, ConstantPolynomialError,
                        DimensionMismatchError, IndexOutOfRangeError, EmptyInputError)),
        ("geometry", (ZeroDirectionError, ZeroPolynomialError, NonGenericLiftingError)),
        ("io", (FileNotFoundError, PermissionError, IsADirectoryError)),
    )

    @staticmethod
    def handle_error(error: Exception, context: str, logger_instance=None,
                     recovery_func: Optional[Callable] = None,
                     recovery_args: Optional[tuple] = None) -> bool:
        """
        Handle an error with consistent logging and optional recovery

        Args:
            error: The exception that occurred
            context: Description of where the error occurred
            logger_instance: Optional logger instance (uses default if None)
            recovery_func: Optional function to call for recovery
            recovery_args: Arguments to pass to recovery function

        Returns:
            True if error was handled successfully, False otherwise
        """
        log = logger_instance or logger
        # toolkit errors are expected user-facing failures, no traceback
        log.error(f"Error in {context}: {error}",
                  exc_info=not isinstance(error, EDDegError))

        if recovery_func:
            try:
                recovery_func(*(recovery_args or ()))
                log.info(f"Recovery successful for {context}")
                return True
            except Exception as recovery_error:
                log.error(f"Recovery failed for {context}: {recovery_error}", exc_info=True)
                return False

        return False

    @staticmethod
    def log_warning(message: str, context: str = "Unknown", logger_instance=None):
        """Log a warning with context"""
        log = logger_instance or logger
        log.warning(f"Warning in {context}: {message}")

    @staticmethod
    def format_error_message(error: Exception, context: str) -> str:
        """Format error message for user display"""
        error_type = type(error).__name__
        return f"An error occurred in {context}: {error_type} - {error}"

    @classmethod
    def get_error_category(cls, error: Exception) -> str:
        """Categorize error for reporting"""
        for category, types in cls.CATEGORIES:
            if isinstance(error, types):
                return category
        return "general"

    @staticmethod
    def exit_code_for(error: Exception) -> int:
        """Every error maps to the generic error exit code"""
        return EXIT_CODES['ERROR']


# Global error handler instance
error_handler = ErrorHandler()
