//! Agent-side encoder and learner-side decoder for quantized rewards.
//!
//! The learner broadcasts a centre `mu_hat` and a step `M`. The agent
//! normalises its reward to `r_bar = r/M - floor(mu_hat/M)` and stochastically
//! rounds it to an integer neighbour. Values near the centre cost a 3-bit
//! case code; values further out add a flag bit, a unary index into the
//! ladder `{0, 1, 2, 4, 8, ...}` and a fixed-width residual.
//!
//! Wire layout, MSB first:
//!
//! ```text
//! [case:3] [flag:1]? [unary ladder index]? [residual:w]?
//!
//! case 000..101  -> r_hat_bar = -2..=3            (3 bits total)
//! case 110 / 111 -> below -2 / above 3, flag follows
//!   flag 0       -> r_hat_bar = -3 / 4            (4 bits total)
//!   flag 1       -> tail: (I-1) zeros, a one, then the residual
//! ```
//!
//! In the tail the excess `r' = |r_bar| - |a|` (with `a = 4` above and
//! `a = -3` below) is split into the largest ladder value `l <= r'` and a
//! remainder `e = r' - l` in `[0, max(l, 1))`. The remainder is
//! stochastically rounded onto `{0, ..., max(l, 1)}` and sent with
//! `max(1, ceil(log2(l + 1)))` bits.
//!
//! The decoded reward always lands on `M*floor(r/M)` or `M*ceil(r/M)`, with the
//! upper value chosen with probability `frac(r/M)`, whatever `mu_hat` is.

use crate::bits::{BitReader, BitString};
use crate::math;
use crate::rng::RngStream;
use crate::sq;

/// Largest ladder index a decoder accepts (`l = 2^58`).
pub const MAX_LADDER_INDEX: u32 = 60;

/// `|r/M|` and `|mu_hat/M|` must stay below this so every intermediate
/// integer is exact in an `f64`.
pub const NORMALIZED_LIMIT: f64 = (1u64 << 50) as f64;

const CODE_OUT_NEG: u8 = 0b110;
const CODE_OUT_POS: u8 = 0b111;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CodecError {
    #[error("quantization step must be positive and finite, got {0}")]
    NonPositiveM(f64),
    #[error("non-finite input")]
    NonFinite,
    #[error("normalised value {0} exceeds the supported range")]
    OutOfRange(f64),
    #[error("scale sample {0} violates |X| >= 1")]
    BadScale(f64),
    #[error("invalid quantizer parameter: {0}")]
    BadConfig(&'static str),
    #[error("malformed frame: {0}")]
    MalformedFrame(&'static str),
}

/// The 3-bit case code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseCode {
    /// `r_hat_bar` in `-2..=3`.
    Central(i8),
    OutNeg,
    OutPos,
}

impl CaseCode {
    pub fn to_bits(self) -> u8 {
        match self {
            CaseCode::Central(v) => (v + 2) as u8,
            CaseCode::OutNeg => CODE_OUT_NEG,
            CaseCode::OutPos => CODE_OUT_POS,
        }
    }

    pub fn from_bits(bits: u8) -> Option<Self> {
        match bits {
            0..=5 => Some(CaseCode::Central(bits as i8 - 2)),
            CODE_OUT_NEG => Some(CaseCode::OutNeg),
            CODE_OUT_POS => Some(CaseCode::OutPos),
            _ => None,
        }
    }
}

/// Ladder value for a 1-based ladder index: `1 -> 0`, `I -> 2^(I-2)`.
pub fn ladder_value(index: u32) -> u64 {
    debug_assert!((1..=MAX_LADDER_INDEX).contains(&index));
    if index == 1 {
        0
    } else {
        1u64 << (index - 2)
    }
}

/// Inverse of [`ladder_value`]. `None` if `value` is not on the ladder.
pub fn ladder_index(value: u64) -> Option<u32> {
    match value {
        0 => Some(1),
        v if v.is_power_of_two() => Some(v.trailing_zeros() + 2),
        _ => None,
    }
}

/// Largest ladder value not exceeding `x`.
fn ladder_floor(x: u64) -> u64 {
    if x == 0 {
        0
    } else {
        1u64 << (63 - x.leading_zeros())
    }
}

/// Residual field width for ladder value `l`: `max(1, ceil(log2(l + 1)))`.
pub fn residual_width(ladder: u64) -> u32 {
    64 - ladder.max(1).leading_zeros()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tail {
    /// 1-based index of the ladder value, sent in unary.
    pub ladder_index: u32,
    /// Stochastically rounded remainder, in `0..=max(l, 1)`.
    pub residual: u64,
}

impl Tail {
    pub fn ladder(&self) -> u64 {
        ladder_value(self.ladder_index)
    }

    pub fn width(&self) -> u32 {
        residual_width(self.ladder())
    }
}

/// One quantized reward, ready for the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubanFrame {
    case: CaseCode,
    flag: Option<bool>,
    tail: Option<Tail>,
}

impl QubanFrame {
    pub fn central(value: i8) -> Result<Self, CodecError> {
        if !(-2..=3).contains(&value) {
            return Err(CodecError::MalformedFrame("central value outside -2..=3"));
        }
        Ok(Self {
            case: CaseCode::Central(value),
            flag: None,
            tail: None,
        })
    }

    /// Boundary frame: `r_hat_bar = 4` when `positive`, else `-3`.
    pub fn boundary(positive: bool) -> Self {
        Self {
            case: if positive {
                CaseCode::OutPos
            } else {
                CaseCode::OutNeg
            },
            flag: Some(false),
            tail: None,
        }
    }

    pub fn tail(positive: bool, ladder_index: u32, residual: u64) -> Result<Self, CodecError> {
        if !(1..=MAX_LADDER_INDEX).contains(&ladder_index) {
            return Err(CodecError::MalformedFrame("ladder index out of range"));
        }
        if residual > ladder_value(ladder_index).max(1) {
            return Err(CodecError::MalformedFrame("residual above its grid"));
        }
        Ok(Self {
            case: if positive {
                CaseCode::OutPos
            } else {
                CaseCode::OutNeg
            },
            flag: Some(true),
            tail: Some(Tail {
                ladder_index,
                residual,
            }),
        })
    }

    pub fn case(&self) -> CaseCode {
        self.case
    }

    pub fn flag(&self) -> Option<bool> {
        self.flag
    }

    pub fn tail_fields(&self) -> Option<Tail> {
        self.tail
    }

    /// Exact emitted length: 3 central, 4 boundary, `4 + I + w(l)` tail.
    pub fn bit_len(&self) -> u32 {
        3 + u32::from(self.flag.is_some())
            + self.tail.map_or(0, |t| t.ladder_index + t.width())
    }

    pub fn write_to(&self, out: &mut BitString) {
        out.push_bits(u64::from(self.case.to_bits()), 3);
        if let Some(flag) = self.flag {
            out.push(flag);
        }
        if let Some(tail) = self.tail {
            for _ in 1..tail.ladder_index {
                out.push(false);
            }
            out.push(true);
            out.push_bits(tail.residual, tail.width());
        }
    }

    pub fn to_bits(&self) -> BitString {
        let mut out = BitString::with_capacity(self.bit_len() as usize);
        self.write_to(&mut out);
        out
    }

    /// Parses one frame at the reader's cursor, consuming exactly its bits.
    pub fn read_from(reader: &mut BitReader<'_>) -> Result<Self, CodecError> {
        const TRUNCATED: CodecError = CodecError::MalformedFrame("truncated frame");
        let code = reader.read(3).map_err(|_| TRUNCATED)? as u8;
        let case = CaseCode::from_bits(code).expect("every 3-bit code is assigned");
        if let CaseCode::Central(_) = case {
            return Ok(Self {
                case,
                flag: None,
                tail: None,
            });
        }
        let positive = case == CaseCode::OutPos;
        if !reader.read_bit().map_err(|_| TRUNCATED)? {
            return Ok(Self::boundary(positive));
        }
        let mut index = 1;
        while !reader
            .read_bit()
            .map_err(|_| CodecError::MalformedFrame("truncated unary ladder index"))?
        {
            index += 1;
            if index > MAX_LADDER_INDEX {
                return Err(CodecError::MalformedFrame("unary ladder index too long"));
            }
        }
        let width = residual_width(ladder_value(index));
        let residual = reader
            .read(width as usize)
            .map_err(|_| CodecError::MalformedFrame("truncated residual"))?;
        Self::tail(positive, index, residual)
    }

    /// Sign of the tail side: `+1` for [`CaseCode::OutPos`], `-1` for
    /// [`CaseCode::OutNeg`], `0` for central codes.
    pub fn sign(&self) -> i64 {
        match self.case {
            CaseCode::OutPos => 1,
            CaseCode::OutNeg => -1,
            CaseCode::Central(_) => 0,
        }
    }

    /// The quantized normalised reward `r_hat_bar` this frame carries,
    /// reconstructed case by case as `s * (e_q + l + |a|)` in the tail.
    pub fn level(&self) -> i64 {
        match (self.case, self.tail) {
            (CaseCode::Central(v), _) => i64::from(v),
            (CaseCode::OutPos, None) => 4,
            (CaseCode::OutNeg, None) => -3,
            (CaseCode::OutPos, Some(t)) => (t.residual + t.ladder()) as i64 + 4,
            (CaseCode::OutNeg, Some(t)) => -((t.residual + t.ladder()) as i64 + 3),
        }
    }
}

/// How `X_t` is drawn when forming `M_t = epsilon * sigma * X_t`.
#[derive(Debug, Clone, Copy)]
pub enum ScaleSampler {
    Constant(f64),
    /// Any sampler whose draws satisfy `X >= 1`.
    Custom(fn(&mut RngStream) -> f64),
}

impl ScaleSampler {
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            ScaleSampler::Constant(x) => x,
            ScaleSampler::Custom(f) => f(rng),
        }
    }
}

/// Codec parameters shared by learner and agents.
#[derive(Debug, Clone, Copy)]
pub struct QuantizerConfig {
    pub epsilon: f64,
    /// Sub-gaussian scale of the rewards, or an estimate of it.
    pub sigma: f64,
    pub scale: ScaleSampler,
}

impl QuantizerConfig {
    pub fn new(epsilon: f64, sigma: f64) -> Result<Self, CodecError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(CodecError::BadConfig("epsilon must be positive"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(CodecError::BadConfig("sigma must be positive"));
        }
        Ok(Self {
            epsilon,
            sigma,
            scale: ScaleSampler::Constant(1.0),
        })
    }

    pub fn with_scale(mut self, scale: ScaleSampler) -> Self {
        self.scale = scale;
        self
    }

    /// Draws `X_t` and returns `M_t = epsilon * sigma * X_t`.
    pub fn step(&self, rng: &mut RngStream) -> Result<f64, CodecError> {
        let x = self.scale.sample(rng);
        if !(x.is_finite() && x >= 1.0) {
            return Err(CodecError::BadScale(x));
        }
        Ok(self.epsilon * self.sigma * x)
    }
}

/// Where the normalised reward falls relative to the central window
/// `[-3, 4]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Central,
    Upper,
    Lower,
}

/// `r_bar = whole + frac` with `0 <= frac < 1`, plus the integer centre
/// `floor(mu_hat / M)` it was measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub center: i64,
    pub whole: i64,
    pub frac: f64,
}

impl Normalized {
    pub fn new(r: f64, mu_hat: f64, m: f64) -> Result<Self, CodecError> {
        check_step(m)?;
        if !(r.is_finite() && mu_hat.is_finite()) {
            return Err(CodecError::NonFinite);
        }
        let q = r / m;
        let c = mu_hat / m;
        for v in [q, c] {
            if !v.is_finite() || v.abs() >= NORMALIZED_LIMIT {
                return Err(CodecError::OutOfRange(v));
            }
        }
        let (qw, frac) = sq::split(q);
        let center = math::floor(c) as i64;
        Ok(Self {
            center,
            whole: qw as i64 - center,
            frac,
        })
    }

    pub fn r_bar(&self) -> f64 {
        self.whole as f64 + self.frac
    }

    pub fn region(&self) -> Region {
        if self.whole < -3 {
            Region::Lower
        } else if self.whole > 4 || (self.whole == 4 && self.frac > 0.0) {
            Region::Upper
        } else {
            Region::Central
        }
    }
}

/// Intermediate quantities of one encode, for inspection and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecScratch {
    pub r_bar: f64,
    pub region: Region,
    /// `+1` above, `-1` below, `0` central.
    pub sign: i64,
    /// Boundary `a`: `4` above, `-3` below, `0` central.
    pub boundary: i64,
    pub ladder: u64,
    /// Remainder `e = |r_bar| - |a| - l` (tail only).
    pub residual: f64,
    /// Rounded remainder (tail) or rounded `r_bar` (central).
    pub quantized: i64,
}

fn check_step(m: f64) -> Result<(), CodecError> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(CodecError::NonPositiveM(m))
    }
}

/// Agent-side encoder.
pub fn encode(r: f64, mu_hat: f64, m: f64, rng: &mut RngStream) -> Result<QubanFrame, CodecError> {
    encode_traced(r, mu_hat, m, rng).map(|(frame, _)| frame)
}

pub fn encode_traced(
    r: f64,
    mu_hat: f64,
    m: f64,
    rng: &mut RngStream,
) -> Result<(QubanFrame, CodecScratch), CodecError> {
    let n = Normalized::new(r, mu_hat, m)?;
    let region = n.region();
    match region {
        Region::Central => {
            let q = sq::round_split(n.whole, n.frac, rng);
            let frame = match q {
                4 => QubanFrame::boundary(true),
                -3 => QubanFrame::boundary(false),
                v => QubanFrame::central(v as i8)?,
            };
            let scratch = CodecScratch {
                r_bar: n.r_bar(),
                region,
                sign: 0,
                boundary: 0,
                ladder: 0,
                residual: 0.0,
                quantized: q,
            };
            Ok((frame, scratch))
        }
        Region::Upper | Region::Lower => {
            let positive = region == Region::Upper;
            // Excess over the boundary, split as floor + fraction.
            let (excess_whole, excess_frac) = if positive {
                (n.whole - 4, n.frac)
            } else if n.frac == 0.0 {
                (-n.whole - 3, 0.0)
            } else {
                let f = 1.0 - n.frac;
                if f >= 1.0 {
                    (-n.whole - 3, 0.0)
                } else {
                    (-n.whole - 4, f)
                }
            };
            debug_assert!(excess_whole >= 0);
            let ladder = ladder_floor(excess_whole as u64);
            let e_whole = excess_whole - ladder as i64;
            let e_q = sq::round_split(e_whole, excess_frac, rng);
            let index = ladder_index(ladder).expect("ladder_floor returns a ladder value");
            let frame = QubanFrame::tail(positive, index, e_q as u64)?;
            let scratch = CodecScratch {
                r_bar: n.r_bar(),
                region,
                sign: if positive { 1 } else { -1 },
                boundary: if positive { 4 } else { -3 },
                ladder,
                residual: e_whole as f64 + excess_frac,
                quantized: e_q,
            };
            Ok((frame, scratch))
        }
    }
}

/// Constants of the closed-form tail decode
/// `r_hat = (s*(e_q + l + magnitude) + shift + floor(mu_hat/M)) * M`.
/// Only the default is correct; other values exist for fault injection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOffsets {
    pub magnitude: f64,
    pub shift: f64,
}

impl Default for DecodeOffsets {
    fn default() -> Self {
        Self {
            magnitude: 3.5,
            shift: 0.5,
        }
    }
}

/// Learner-side decoder: lookup for frames of at most 4 bits, closed form
/// for tail frames.
pub fn decode(frame: &QubanFrame, mu_hat: f64, m: f64) -> Result<f64, CodecError> {
    decode_with(frame, mu_hat, m, DecodeOffsets::default())
}

pub fn decode_with(
    frame: &QubanFrame,
    mu_hat: f64,
    m: f64,
    offsets: DecodeOffsets,
) -> Result<f64, CodecError> {
    let center = center_of(mu_hat, m)?;
    let level = match frame.tail {
        None => frame.level() as f64,
        Some(t) => {
            let s = frame.sign() as f64;
            s * (t.residual as f64 + t.ladder() as f64 + offsets.magnitude) + offsets.shift
        }
    };
    Ok((level + center) * m)
}

/// Decodes by explicit case reconstruction, `s*(e_q + l + |a|)` in the
/// tail. Agrees exactly with [`decode`].
pub fn decode_explicit(frame: &QubanFrame, mu_hat: f64, m: f64) -> Result<f64, CodecError> {
    let center = center_of(mu_hat, m)?;
    Ok((frame.level() as f64 + center) * m)
}

fn center_of(mu_hat: f64, m: f64) -> Result<f64, CodecError> {
    check_step(m)?;
    if !mu_hat.is_finite() {
        return Err(CodecError::NonFinite);
    }
    let c = mu_hat / m;
    if c.abs() >= NORMALIZED_LIMIT {
        return Err(CodecError::OutOfRange(c));
    }
    Ok(math::floor(c))
}

/// Parses and decodes one frame from `reader`.
pub fn decode_from(
    reader: &mut BitReader<'_>,
    mu_hat: f64,
    m: f64,
) -> Result<(QubanFrame, f64), CodecError> {
    let frame = QubanFrame::read_from(reader)?;
    let r_hat = decode(&frame, mu_hat, m)?;
    Ok((frame, r_hat))
}

pub fn frame_bit_count(frame: &QubanFrame) -> u32 {
    frame.bit_len()
}

/// High-probability per-reward bit bound for horizon `n`, base-2 logs:
/// `4 + ceil(log2(4 log2 n)) + ceil(log2 log2(4 log2 n))`.
/// Horizons below 2 are treated as 2.
pub fn instantaneous_bound(n: u64) -> u32 {
    let n = n.max(2) as f64;
    let inner = 4.0 * math::log2(n);
    let first = math::log2(inner);
    let second = math::log2(first);
    4 + math::ceil(first) as u32 + math::ceil(second) as u32
}
