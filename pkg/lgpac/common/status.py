"""
Descriptive status codes, for code readability.

HTTP codes follow RFC 2616 and RFC 4918; exit codes are those of the
lgpac command line.
"""

HTTP_200_OK = 200

HTTP_400_BAD_REQUEST = 400
HTTP_404_NOT_FOUND = 404
HTTP_405_METHOD_NOT_ALLOWED = 405
HTTP_415_UNSUPPORTED_MEDIA_TYPE = 415
HTTP_422_UNPROCESSABLE_ENTITY = 422

HTTP_500_INTERNAL_SERVER_ERROR = 500

# Command line exit codes
EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_RUNTIME = 2
EXIT_NOT_CERTIFIED = 3
