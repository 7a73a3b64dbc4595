"""Common helpers: status codes, logging, error handlers and CLI commands"""
