"""Bit-accurate, cycle-accounted model of the fixed-point inference engine.

The datapath mirrors a pipelined FPGA implementation of the three-input
network: memberships come from 256-entry lookup tables (one clock), rule
firing strengths from a two-stage multiplier (two clocks), numerator and
denominator from parallel log-depth sum-of-products trees, and the output
from a fixed-latency divider. All arithmetic is integer, with widths chosen
so the 27-rule accumulations provably cannot overflow:

    inputs       U(8,8)    code = round(x * 256), saturating at 255
    memberships  U(16,16)  LUT entry = round(mu * 2^16), saturating
    products     U(32,32)  (m1*m2*m3) >> 16
    consequents  S(16,14)
    N accum      S(48,32)  per-rule w*c trimmed by >> 14 before the tree
    D accum      U(40,32)
    output       S(32,16)  quotient truncated toward zero

Cycle accounting is structural (the schedule, not a waveform): one cycle of
lookup, two of products, ceil(log2(k)) + 2 for each tree, 43 for the
divider — 53 in total for the 27-rule network.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .anfis import N_INPUTS, N_MFS, N_RULES, AnfisModel, mf_eval
from .errors import NumericError, ParseError, ValidationError
from .fixedpoint import QFormat

DIVIDER_LATENCY = 43
MF_LATENCY = 1
RULE_PRODUCT_LATENCY = 2

LUT_SIZE = 256

MAGIC = b"HWA1"
STAGE_ORDER = ("input", "lut", "product", "consequent", "n_acc", "d_acc", "output")


@dataclass(frozen=True)
class HwFormats:
    input: QFormat = QFormat(8, 8, False)
    lut: QFormat = QFormat(16, 16, False)
    product: QFormat = QFormat(32, 32, False)
    consequent: QFormat = QFormat(16, 14, True)
    n_acc: QFormat = QFormat(48, 32, True)
    d_acc: QFormat = QFormat(40, 32, False)
    output: QFormat = QFormat(32, 16, True)

    def as_tuple(self) -> tuple[QFormat, ...]:
        return tuple(getattr(self, name) for name in STAGE_ORDER)

    def to_dict(self) -> dict:
        return {name: getattr(self, name).to_dict() for name in STAGE_ORDER}


DEFAULT_FORMATS = HwFormats()


@dataclass(frozen=True)
class MfLut:
    """One input/label membership table, addressed by the 8-bit input code."""

    codes: np.ndarray  # (LUT_SIZE,) uint16

    def __post_init__(self):
        object.__setattr__(self, "codes", np.asarray(self.codes, dtype=np.uint16))
        if self.codes.shape != (LUT_SIZE,):
            raise ValidationError(f"membership table must have {LUT_SIZE} entries")

    def lookup(self, code: int) -> int:
        return int(self.codes[code])


@dataclass(frozen=True)
class HwAnfis:
    luts: tuple[tuple[MfLut, ...], ...]  # [input][label]
    consequents: tuple[int, ...]  # N_RULES codes in the consequent format
    formats: HwFormats = DEFAULT_FORMATS

    def __post_init__(self):
        if len(self.luts) != N_INPUTS or any(len(row) != N_MFS for row in self.luts):
            raise ValidationError(f"expected {N_INPUTS}x{N_MFS} membership tables")
        if len(self.consequents) != N_RULES:
            raise ValidationError(f"expected {N_RULES} consequent codes")
        for code in self.consequents:
            if not self.formats.consequent.contains(code):
                raise ValidationError(f"consequent code {code} outside its format")


@dataclass(frozen=True)
class CycleReport:
    cycles_mf: int = MF_LATENCY
    cycles_rule_product: int = RULE_PRODUCT_LATENCY
    cycles_sum_of_products: int = 7
    cycles_divider: int = DIVIDER_LATENCY

    @property
    def total(self) -> int:
        return (
            self.cycles_mf
            + self.cycles_rule_product
            + self.cycles_sum_of_products
            + self.cycles_divider
        )


def quantize_model(model: AnfisModel, formats: HwFormats = DEFAULT_FORMATS) -> HwAnfis:
    """Tabulate the memberships and quantize the consequents.

    LUT entry i holds the membership at x = i/256; 1.0 saturates to the
    largest code. A consequent outside the signed table range is an error —
    saturating it would silently reshape the output surface.
    """
    grid = np.arange(LUT_SIZE) / LUT_SIZE
    luts = []
    for i in range(N_INPUTS):
        row = []
        for m in range(N_MFS):
            mu = mf_eval(model.mf(i, m), grid)
            codes = np.clip(np.rint(mu * formats.lut.scale), 0, formats.lut.max_code)
            row.append(MfLut(codes=codes.astype(np.uint16)))
        luts.append(tuple(row))
    consequents = []
    for j, c in enumerate(model.consequents):
        consequents.append(
            formats.consequent.quantize_exact(float(c), what=f"rule {j} consequent")
        )
    return HwAnfis(luts=tuple(luts), consequents=tuple(consequents), formats=formats)


def quantize_input(x: float, fmt: QFormat = DEFAULT_FORMATS.input) -> int:
    return fmt.quantize(float(x))


def quantize_inputs(xs, fmt: QFormat = DEFAULT_FORMATS.input) -> tuple[int, ...]:
    return tuple(quantize_input(x, fmt) for x in xs)


def dequantize_output(code: int, fmt: QFormat = DEFAULT_FORMATS.output) -> float:
    return fmt.dequantize(code)


def _check_input_codes(hw: HwAnfis, x_codes) -> tuple[int, int, int]:
    codes = tuple(int(c) for c in x_codes)
    if len(codes) != N_INPUTS:
        raise ValidationError(f"expected {N_INPUTS} input codes, got {len(codes)}")
    for c in codes:
        if not hw.formats.input.contains(c):
            raise ValidationError(f"input code {c} outside {hw.formats.input.describe()}")
    return codes


def _membership_codes(hw: HwAnfis, codes) -> list[list[int]]:
    return [[hw.luts[i][m].lookup(codes[i]) for m in range(N_MFS)] for i in range(N_INPUTS)]


def _rule_product_codes(hw: HwAnfis, ms: list[list[int]]) -> list[int]:
    # stage 1: m1*m2 exact at 2*frac bits; stage 2: *m3 then trim back
    shift = hw.formats.lut.frac_bits
    w = []
    for j in range(N_RULES):
        i1, i2, i3 = j // 9, (j // 3) % 3, j % 3
        p12 = ms[0][i1] * ms[1][i2]
        w.append((p12 * ms[2][i3]) >> shift)
    return w


def _fold_schedule(products: list[int], acc_format: QFormat | None, label: str):
    """Pairwise-halving adder tree; returns (total, register-0 value per stage)."""
    regs = list(products)
    stage_values = []
    stage = 0
    while len(regs) > 1:
        stage += 1
        nxt = []
        for i in range(0, len(regs) - 1, 2):
            nxt.append(regs[i] + regs[i + 1])
        if len(regs) % 2:
            nxt.append(regs[-1])
        if acc_format is not None:
            for val in nxt:
                if not acc_format.contains(val):
                    raise NumericError(
                        f"{label} accumulator overflow at fold stage {stage} "
                        f"(value {val} exceeds {acc_format.describe()})"
                    )
        regs = nxt
        stage_values.append(regs[0])
    return regs[0], stage_values


def sum_of_products(
    u, v, *, product_shift: int = 0, acc_format: QFormat | None = None, label: str = "dot"
) -> tuple[int, int]:
    """Integer dot product on the register-halving schedule.

    Products are optionally arithmetic-shifted right (the MAC trim) before
    entering the tree. Latency is one cycle to store the k products, one per
    fold stage, and one to latch: ceil(log2(k)) + 2.
    """
    u = list(u)
    v = list(v)
    if len(u) != len(v):
        raise ValidationError("operand vectors must have equal length")
    if not u:
        raise ValidationError("sum of products needs at least one term")
    products = [(int(a) * int(b)) >> product_shift for a, b in zip(u, v)]
    if acc_format is not None:
        for j, val in enumerate(products):
            if not acc_format.contains(val):
                raise NumericError(
                    f"{label} product {j} does not fit {acc_format.describe()}"
                )
    value, stage_values = _fold_schedule(products, acc_format, label)
    return value, len(stage_values) + 2


def divide(
    n_code: int,
    d_code: int,
    *,
    n_frac: int = 32,
    d_frac: int = 32,
    out_format: QFormat = DEFAULT_FORMATS.output,
) -> tuple[int, int]:
    """Fixed-point quotient truncated toward zero; constant 43-cycle latency."""
    if d_code == 0:
        raise NumericError("divider denominator is zero")
    shift = out_format.frac_bits + d_frac - n_frac
    num, den = int(n_code), int(d_code)
    if shift >= 0:
        num <<= shift
    else:
        den <<= -shift
    q = abs(num) // abs(den)
    if (num < 0) != (den < 0):
        q = -q
    return out_format.clamp(q), DIVIDER_LATENCY


def _infer_codes(hw: HwAnfis, codes) -> tuple[int, int, int, list[int]]:
    ms = _membership_codes(hw, codes)
    w = _rule_product_codes(hw, ms)
    c_frac = hw.formats.consequent.frac_bits
    one = hw.formats.consequent.scale  # exact 1.0 passthrough for the D tree
    n_val, sop_latency = sum_of_products(
        w, hw.consequents, product_shift=c_frac, acc_format=hw.formats.n_acc, label="numerator"
    )
    d_val, _ = sum_of_products(
        w, [one] * N_RULES, product_shift=c_frac, acc_format=hw.formats.d_acc, label="denominator"
    )
    if d_val == 0:
        raise NumericError(f"no rule fired for input codes {list(codes)}")
    return n_val, d_val, sop_latency, w


def hw_infer(hw: HwAnfis, x_codes) -> tuple[int, CycleReport]:
    """Output code and the cycle budget for one inference."""
    codes = _check_input_codes(hw, x_codes)
    n_val, d_val, sop_latency, _ = _infer_codes(hw, codes)
    y_code, div_latency = divide(
        n_val,
        d_val,
        n_frac=hw.formats.n_acc.frac_bits,
        d_frac=hw.formats.d_acc.frac_bits,
        out_format=hw.formats.output,
    )
    report = CycleReport(
        cycles_sum_of_products=sop_latency, cycles_divider=div_latency
    )
    return y_code, report


def bank_infer(bank, x_codes) -> tuple[int, tuple[float, ...], CycleReport]:
    """Run all style engines in parallel; argmax with lowest-index tie-break.

    The cycle report is the per-instance maximum — the instances run
    concurrently, so the bank finishes when the slowest one does.
    """
    bank = tuple(bank)
    if len(bank) != 3:
        raise ValidationError(f"expected a 3-engine bank, got {len(bank)}")
    results = [hw_infer(hw, x_codes) for hw in bank]
    y_codes = [code for code, _ in results]
    style = y_codes.index(max(y_codes))
    report = max((rep for _, rep in results), key=lambda r: r.total)
    outputs = tuple(
        dequantize_output(code, hw.formats.output) for (code, _), hw in zip(results, bank)
    )
    return style, outputs, report


@dataclass(frozen=True)
class TraceEntry:
    cycle: int
    signal: str
    stage: str
    value_hex: str


def _hex(code: int, fmt: QFormat) -> str:
    mask = (1 << fmt.total_bits) - 1
    return format(int(code) & mask, f"0{(fmt.total_bits + 3) // 4}x")


def run_control_sequence(hw: HwAnfis, x_codes) -> list[TraceEntry]:
    """Cycle-by-cycle signal schedule for one inference.

    rst clears the pipeline at cycle 0; the table lookup lands at cycle 1;
    CE_mult drives the two product stages at cycles 2-3; is_prod stores the
    27 trimmed products at cycle 4; CE folds the trees through cycle 10;
    CE_div runs the divider from cycle 11, with the output valid at cycle 53.
    The value column shows register 0 of the stage active that cycle.
    """
    codes = _check_input_codes(hw, x_codes)
    fmts = hw.formats
    ms = _membership_codes(hw, codes)
    w = _rule_product_codes(hw, ms)
    c_frac = fmts.consequent.frac_bits
    n_products = [(wj * cj) >> c_frac for wj, cj in zip(w, hw.consequents)]
    n_val, n_stages = _fold_schedule(n_products, fmts.n_acc, "numerator")
    d_val, _ = _fold_schedule(list(w), fmts.d_acc, "denominator")
    if d_val == 0:
        raise NumericError(f"no rule fired for input codes {list(codes)}")
    y_code, div_latency = divide(
        n_val,
        d_val,
        n_frac=fmts.n_acc.frac_bits,
        d_frac=fmts.d_acc.frac_bits,
        out_format=fmts.output,
    )

    p12_rule0 = ms[0][0] * ms[1][0]
    trace = [
        TraceEntry(0, "rst", "reset", _hex(0, fmts.output)),
        TraceEntry(1, "lut_read", "membership_lookup", _hex(ms[0][0], fmts.lut)),
        TraceEntry(2, "CE_mult", "rule_product_1", _hex(p12_rule0, fmts.product)),
        TraceEntry(3, "CE_mult", "rule_product_2", _hex(w[0], fmts.product)),
        TraceEntry(4, "is_prod|CE", "sop_store", _hex(n_products[0], fmts.n_acc)),
    ]
    cycle = 5
    for s, reg0 in enumerate(n_stages, start=1):
        trace.append(TraceEntry(cycle, "CE", f"sop_fold_{s}", _hex(reg0, fmts.n_acc)))
        cycle += 1
    trace.append(TraceEntry(cycle, "CE", "sop_latch", _hex(n_val, fmts.n_acc)))
    cycle += 1
    div_start = cycle
    for c in range(div_start, div_start + div_latency - 1):
        trace.append(TraceEntry(c, "CE_div", "divide", _hex(0, fmts.output)))
    done = div_start + div_latency - 1
    trace.append(TraceEntry(done, "CE_div|output_valid", "output", _hex(y_code, fmts.output)))
    return trace


def write_trace(trace: list[TraceEntry], path) -> None:
    with open(str(path), "w") as fh:
        fh.write("cycle,signal,stage,value_hex\n")
        for entry in trace:
            fh.write(f"{entry.cycle},{entry.signal},{entry.stage},{entry.value_hex}\n")


def trace_output_code(trace: list[TraceEntry], fmt: QFormat = DEFAULT_FORMATS.output) -> int:
    """Signed output code recovered from the final trace row."""
    raw = int(trace[-1].value_hex, 16)
    if fmt.signed and raw >= 1 << (fmt.total_bits - 1):
        raw -= 1 << fmt.total_bits
    return raw


def save_hw(hw: HwAnfis, path) -> None:
    """Little-endian binary image plus a JSON mirror alongside it."""
    with open(str(path), "wb") as fh:
        fh.write(MAGIC)
        for i in range(N_INPUTS):
            for m in range(N_MFS):
                fh.write(hw.luts[i][m].codes.astype("<u2").tobytes())
        fh.write(struct.pack(f"<{N_RULES}h", *hw.consequents))
        for fmt in hw.formats.as_tuple():
            fh.write(struct.pack("<BBB", fmt.total_bits, fmt.frac_bits, int(fmt.signed)))
    mirror = {
        "magic": MAGIC.decode("ascii"),
        "luts": [
            [hw.luts[i][m].codes.tolist() for m in range(N_MFS)] for i in range(N_INPUTS)
        ],
        "consequents": list(hw.consequents),
        "formats": hw.formats.to_dict(),
        "stage_order": list(STAGE_ORDER),
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(mirror, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_hw(path) -> HwAnfis:
    with open(str(path), "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ParseError(f"{path}: bad magic {blob[:4]!r}, expected {MAGIC!r}")
    expect = 4 + N_INPUTS * N_MFS * LUT_SIZE * 2 + N_RULES * 2 + len(STAGE_ORDER) * 3
    if len(blob) != expect:
        raise ParseError(f"{path}: expected {expect} bytes, found {len(blob)}")
    off = 4
    luts = []
    for _ in range(N_INPUTS):
        row = []
        for _ in range(N_MFS):
            codes = np.frombuffer(blob, dtype="<u2", count=LUT_SIZE, offset=off)
            row.append(MfLut(codes=codes.copy()))
            off += LUT_SIZE * 2
        luts.append(tuple(row))
    consequents = struct.unpack_from(f"<{N_RULES}h", blob, off)
    off += N_RULES * 2
    fmts = {}
    for name in STAGE_ORDER:
        total, frac, signed = struct.unpack_from("<BBB", blob, off)
        fmts[name] = QFormat(total, frac, bool(signed))
        off += 3
    return HwAnfis(luts=tuple(luts), consequents=tuple(consequents), formats=HwFormats(**fmts))
