"""
Module: error_handlers

Domain errors raised inside API resources are handled by the flask-restx
Api (see register); plain HTTP errors by the Flask app.
"""
from flask import jsonify
from flask import current_app as app  # Import Flask application
from lgpac.dsl import DslError
from lgpac.models.base import CompilationError, DataValidationError
from lgpac.simulator import SimulationError
from . import status


def error_body(code: int, error: str, message: str, **extra) -> dict:
    """The JSON body every error response shares"""
    return {"status": code, "error": error, "message": message, **extra}


######################################################################
# Domain Error Handlers
######################################################################
def register(api):
    """Attaches the domain error handlers to a flask-restx Api"""

    # first match wins, so DslError goes before its base class
    @api.errorhandler(DslError)
    def dsl_error(error):
        """Handles DSL sources with diagnostics"""
        app.logger.warning(str(error))
        diagnostics = [d.serialize() for d in error.diagnostics]
        return error_body(status.HTTP_400_BAD_REQUEST, "Bad Request", str(error), diagnostics=diagnostics), \
            status.HTTP_400_BAD_REQUEST

    @api.errorhandler(DataValidationError)
    @api.errorhandler(CompilationError)
    def request_validation_error(error):
        """Handles bad data and networks that do not compile"""
        app.logger.warning(str(error))
        return error_body(status.HTTP_400_BAD_REQUEST, "Bad Request", str(error)), status.HTTP_400_BAD_REQUEST

    @api.errorhandler(SimulationError)
    def simulation_error(error):
        """Handles blow-ups with 422_UNPROCESSABLE_ENTITY"""
        app.logger.warning("%s (frontier t=%s)", error, error.frontier)
        body = error_body(status.HTTP_422_UNPROCESSABLE_ENTITY, "Unprocessable Entity", str(error), frontier=error.frontier)
        return body, status.HTTP_422_UNPROCESSABLE_ENTITY

    return api


######################################################################
# HTTP Error Handlers
######################################################################
@app.errorhandler(status.HTTP_404_NOT_FOUND)
def not_found(error):
    """Handles resources not found with 404_NOT_FOUND"""
    app.logger.warning(str(error))
    return jsonify(error_body(status.HTTP_404_NOT_FOUND, "Not Found", str(error))), status.HTTP_404_NOT_FOUND


@app.errorhandler(status.HTTP_405_METHOD_NOT_ALLOWED)
def method_not_supported(error):
    """Handles unsupported HTTP methods with 405_METHOD_NOT_SUPPORTED"""
    app.logger.warning(str(error))
    body = error_body(status.HTTP_405_METHOD_NOT_ALLOWED, "Method not Allowed", str(error))
    return jsonify(body), status.HTTP_405_METHOD_NOT_ALLOWED


@app.errorhandler(status.HTTP_415_UNSUPPORTED_MEDIA_TYPE)
def mediatype_not_supported(error):
    """Handles unsupported media requests with 415_UNSUPPORTED_MEDIA_TYPE"""
    app.logger.warning(str(error))
    body = error_body(status.HTTP_415_UNSUPPORTED_MEDIA_TYPE, "Unsupported media type", str(error))
    return jsonify(body), status.HTTP_415_UNSUPPORTED_MEDIA_TYPE


@app.errorhandler(status.HTTP_500_INTERNAL_SERVER_ERROR)
def internal_server_error(error):
    """Handles unexpected server error with 500_SERVER_ERROR"""
    app.logger.error(str(error))
    body = error_body(status.HTTP_500_INTERNAL_SERVER_ERROR, "Internal Server Error", str(error))
    return jsonify(body), status.HTTP_500_INTERNAL_SERVER_ERROR
