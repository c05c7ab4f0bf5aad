from __future__ import annotations

import functools
from collections.abc import Callable
from typing import Any, TypeVar

from bubbleprice._errors import PostconditionError, PreconditionError
from bubbleprice._util import _qualified_name, _safe_call

F = TypeVar("F", bound=Callable[..., Any])

_BUNDLE_ATTR = "__bubbleprice_contracts__"
_ORIGINAL_ATTR = "__bubbleprice_original__"


def _root_original(fn: Callable[..., Any]) -> Callable[..., Any]:
    cur = fn
    while True:
        nxt = getattr(cur, _ORIGINAL_ATTR, None)
        if nxt is None:
            return cur
        cur = nxt


def _bundle(fn: Callable[..., Any]) -> dict[str, list[tuple[Callable[..., bool], str]]]:
    base = _root_original(fn)
    if not hasattr(base, _BUNDLE_ATTR):
        setattr(base, _BUNDLE_ATTR, {"requires": [], "ensures": []})
    return getattr(base, _BUNDLE_ATTR)  # type: ignore[no-any-return]


def _set_original(wrapper: Callable[..., Any], original: Callable[..., Any]) -> None:
    setattr(wrapper, _ORIGINAL_ATTR, original)
    setattr(wrapper, _BUNDLE_ATTR, _bundle(original))


def contracts_of(fn: Callable[..., Any]) -> dict[str, list[str]]:
    """Descriptions of the preconditions and postconditions attached to ``fn``."""
    b = _bundle(fn)
    return {
        "requires": [desc for _, desc in b["requires"]],
        "ensures": [desc for _, desc in b["ensures"]],
    }


def _check(preds: list[tuple[Callable[..., bool], str]], *args: Any, **kwargs: Any) -> str | None:
    for pred, desc in preds:
        ok, err = _safe_call(pred, *args, **kwargs)
        if not ok:
            return f"{desc} ({err})" if err else desc
    return None


def requires(pred: Callable[..., bool], desc: str = "") -> Callable[[F], F]:
    """Reject calls whose arguments fail ``pred`` with :class:`PreconditionError`.

    ``pred`` receives the same arguments as the decorated function.
    """

    def deco(fn: F) -> F:
        _bundle(fn)["requires"].append((pred, desc or "precondition"))

        @functools.wraps(fn)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            failed = _check(_bundle(fn)["requires"], *args, **kwargs)
            if failed is not None:
                raise PreconditionError(f"Precondition failed for {_qualified_name(_root_original(fn))}: {failed}")
            return fn(*args, **kwargs)

        _set_original(wrapper, fn)
        return wrapper  # type: ignore[return-value]

    return deco


def ensures(pred: Callable[..., bool], desc: str = "") -> Callable[[F], F]:
    """Check ``pred(*args, result=...)`` after every call.

    Stack above :func:`requires`; the wrapped function's preconditions are
    still checked first.
    """

    def deco(fn: F) -> F:
        _bundle(fn)["ensures"].append((pred, desc or "postcondition"))

        @functools.wraps(fn)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            result = fn(*args, **kwargs)
            failed = _check(_bundle(fn)["ensures"], *args, **kwargs, result=result)
            if failed is not None:
                raise PostconditionError(f"Postcondition failed for {_qualified_name(_root_original(fn))}: {failed}")
            return result

        _set_original(wrapper, fn)
        return wrapper  # type: ignore[return-value]

    return deco
