"""Exception types shared across the package."""

from __future__ import annotations


class ConfigError(ValueError):
    """Malformed or invalid configuration (scenario file, mode table, run log)."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class InfeasibleError(RuntimeError):
    """No transmit mode / power / position satisfies the PER budget under the power cap.

    Attributes
    ----------
    shortfall_w : float or None
        Smallest amount of extra transmit power (W) above the cap that would
        have made a single link feasible.
    link : str or None
        Which hop failed ("sr" sensing->router, "rb" router->base, "direct").
    step : int or None
        Zero-based planning step at which the failure occurred.
    """

    def __init__(self, message: str, *, shortfall_w: float | None = None,
                 link: str | None = None, step: int | None = None):
        self.shortfall_w = shortfall_w
        self.link = link
        self.step = step
        super().__init__(message)

    def at_step(self, step: int) -> "InfeasibleError":
        """Return a copy of this error tagged with a step index."""
        return InfeasibleError(f"step {step}: {self.args[0]}", shortfall_w=self.shortfall_w,
                               link=self.link, step=step)
