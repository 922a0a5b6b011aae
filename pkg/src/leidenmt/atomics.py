"""Atomic memory operations usable inside nogil numba kernels.

Numba does not ship CPU atomics, so these are defined as intrinsics that
emit the corresponding LLVM instructions directly.  All operations use
relaxed (monotonic) ordering: the algorithms only need atomicity of the
individual update, not cross-variable ordering.

``atomic_cas_f64`` compares *bit patterns* (the float is reinterpreted as
an i64 for the compare-exchange).  This is deliberate: a numeric compare
would treat ``-0.0`` and ``0.0`` as equal and could report a successful
swap that never happened.
"""

from numba import njit, types
from numba.core import cgutils
from numba.extending import intrinsic

import llvmlite.ir as ir

__all__ = ["atomic_add_i64", "atomic_add_f64", "atomic_cas_f64", "cas_f64"]


def _element_pointer(context, builder, array_type, array_value, index):
    ary = context.make_array(array_type)(context, builder, array_value)
    return cgutils.get_item_pointer(
        context, builder, array_type, ary, (index,), wraparound=False
    )


@intrinsic
def atomic_add_i64(typingctx, arr, idx, val):
    """``old = arr[idx]; arr[idx] += val`` as one atomic op; returns old."""
    if not (isinstance(arr, types.Array) and arr.dtype == types.int64):
        return None
    sig = types.int64(arr, types.intp, types.int64)

    def codegen(context, builder, signature, args):
        array_value, index, value = args
        ptr = _element_pointer(context, builder, signature.args[0], array_value, index)
        return builder.atomic_rmw("add", ptr, value, "monotonic")

    return sig, codegen


@intrinsic
def atomic_add_f64(typingctx, arr, idx, val):
    """``old = arr[idx]; arr[idx] += val`` as one atomic op; returns old."""
    if not (isinstance(arr, types.Array) and arr.dtype == types.float64):
        return None
    sig = types.float64(arr, types.intp, types.float64)

    def codegen(context, builder, signature, args):
        array_value, index, value = args
        ptr = _element_pointer(context, builder, signature.args[0], array_value, index)
        return builder.atomic_rmw("fadd", ptr, value, "monotonic")

    return sig, codegen


@intrinsic
def atomic_cas_f64(typingctx, arr, idx, expected, new):
    """Atomically replace ``arr[idx]`` with ``new`` iff it bit-equals ``expected``.

    Returns True when the swap happened.
    """
    if not (isinstance(arr, types.Array) and arr.dtype == types.float64):
        return None
    sig = types.boolean(arr, types.intp, types.float64, types.float64)

    def codegen(context, builder, signature, args):
        array_value, index, expected_value, new_value = args
        ptr = _element_pointer(context, builder, signature.args[0], array_value, index)
        i64 = ir.IntType(64)
        int_ptr = builder.bitcast(ptr, ir.PointerType(i64))
        expected_bits = builder.bitcast(expected_value, i64)
        new_bits = builder.bitcast(new_value, i64)
        pair = builder.cmpxchg(int_ptr, expected_bits, new_bits, "monotonic", "monotonic")
        return builder.extract_value(pair, 1)

    return sig, codegen


@njit(cache=True)
def cas_f64(arr, idx, expected, new):
    """Python-callable wrapper around :func:`atomic_cas_f64`."""
    return atomic_cas_f64(arr, idx, expected, new)
