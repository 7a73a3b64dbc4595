"""
Environment for Behave Testing

The scenarios talk to a running service over HTTP (start it with
`gunicorn wsgi:app`) at BASE_URL.
"""

from os import getenv

WAIT_SECONDS = int(getenv("WAIT_SECONDS", "60"))
BASE_URL = getenv("BASE_URL", "http://localhost:8000")


def before_all(context):
    """Executed once before all tests"""
    context.base_url = BASE_URL
    context.wait_seconds = WAIT_SECONDS
    context.config.setup_logging()


def before_scenario(context, scenario):  # pylint: disable=unused-argument
    """Each scenario starts without a source or response"""
    context.source = None
    context.resp = None
