"""
puzzleforge - utils package

Logging, decorators, marshmallow fields, rich console helpers, output writers and progress
displays shared by the CLI and the command drivers.
"""
