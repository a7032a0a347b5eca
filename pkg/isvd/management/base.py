from contextlib import contextmanager

from django.core.management.base import BaseCommand, CommandError

from ..exceptions import INPUT_ERRORS

# exit status of a command whose input could not be used
INPUT_ERROR_STATUS = 2
# exit status of a command that ran but found a failed property
PROPERTY_FAILURE_STATUS = 1


class IsvdCommand(BaseCommand):
    """Base class of the ``isvd_*`` management commands.

    Subclasses implement ``perform()`` instead of ``handle()``. Progress is
    written to stdout as ``INFO: message`` lines. Errors caused by the input
    (including malformed options and unreadable files) become
    ``CommandError`` with exit status 2.
    """

    def handle(self, *args, **options):
        self.stdout.ending = None
        self.logfile = self.stdout
        try:
            return self.perform(*args, **options)
        except INPUT_ERRORS + (ValueError, OSError) as exc:
            raise CommandError(
                f"{type(exc).__name__}: {exc}",
                returncode=INPUT_ERROR_STATUS,
            ) from exc

    def perform(self, *args, **options):
        raise NotImplementedError("perform() is abstract")

    def property_failure(self, message):
        return CommandError(message, returncode=PROPERTY_FAILURE_STATUS)

    @contextmanager
    def action_log(self, *args, **kw):
        end = kw.pop("end", "\n")
        self.log_info(*args, **kw, end="")
        yield self.logfile
        self.logfile.write(end)

    def log_info(self, *args, **kw):
        self._log("INFO", *args, **kw)

    def log_warning(self, *args, **kw):
        self._log("WARNING", *args, **kw)

    def _log(self, level_name, message, *msg_args, end="\n"):
        if msg_args:
            message = message % msg_args
        print(f"{level_name}: {message}", file=self.logfile, end=end)
