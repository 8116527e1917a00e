"""Exception hierarchy shared by the library and the command line.

Each class carries the process exit code the CLI maps it to.
"""


class StoryAlignError(Exception):
    exit_code = 2


class UsageError(StoryAlignError, ValueError):
    """Bad arguments or violated preconditions."""

    exit_code = 1


class LoadError(StoryAlignError):
    """Malformed or inconsistent input data."""

    exit_code = 2


class InfeasibleError(StoryAlignError):
    """The alignment constraints admit no solution."""

    exit_code = 3
