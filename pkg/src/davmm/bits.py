"""Two's-complement helpers shared by the tables, engine and baseline."""


def signed_range(width):
    """Inclusive (lo, hi) of a ``width``-bit two's-complement integer."""
    return -(1 << (width - 1)), (1 << (width - 1)) - 1


def fits(value, width):
    lo, hi = signed_range(width)
    return lo <= value <= hi


def min_signed_width(value):
    """Smallest two's-complement width that holds ``value``."""
    if value >= 0:
        return value.bit_length() + 1
    return (-value - 1).bit_length() + 1


def to_twos(value, width):
    """Bit pattern (as a non-negative int) of ``value`` in ``width`` bits."""
    if not fits(value, width):
        raise OverflowError(f"{value} does not fit in {width} signed bits")
    return value & ((1 << width) - 1)


def from_twos(pattern, width):
    pattern &= (1 << width) - 1
    if pattern >> (width - 1):
        return pattern - (1 << width)
    return pattern


def sign_extend(pattern, width, target):
    """Widen a ``width``-bit pattern to ``target`` bits by replicating its MSB."""
    if target < width:
        raise ValueError(f"cannot sign-extend {width} bits to {target}")
    pattern &= (1 << width) - 1
    if pattern >> (width - 1):
        pattern |= ((1 << (target - width)) - 1) << width
    return pattern


def truncate(pattern, width):
    return pattern & ((1 << width) - 1)


def to_binary(value, width):
    """MSB-first bit string of a signed value."""
    return format(to_twos(value, width), f"0{width}b")
