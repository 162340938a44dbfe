//! Pure-function subjects under test and the registry that names them.
//!
//! Every SUT maps a fixed-arity tuple of signed 64-bit integers to either a
//! value string or a captured exception record. Evaluation never panics; all
//! subject failures surface as [`ExecutionOutcome::Exception`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One argument tuple to a SUT.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InputPoint(pub Vec<i64>);

impl InputPoint {
    pub fn new(args: Vec<i64>) -> Self {
        InputPoint(args)
    }

    pub fn args(&self) -> &[i64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for InputPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Result of one SUT call: a value string or a captured exception.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecutionOutcome {
    Value(String),
    Exception { kind: String, message: String },
}

impl ExecutionOutcome {
    pub fn value(s: impl Into<String>) -> Self {
        ExecutionOutcome::Value(s.into())
    }

    pub fn exception(kind: impl Into<String>, message: impl Into<String>) -> Self {
        ExecutionOutcome::Exception {
            kind: kind.into(),
            message: message.into(),
        }
    }

    pub fn is_exception(&self) -> bool {
        matches!(self, ExecutionOutcome::Exception { .. })
    }

    /// Output as a class: the value string, or the exception kind alone.
    pub fn class_string(&self) -> &str {
        match self {
            ExecutionOutcome::Value(v) => v,
            ExecutionOutcome::Exception { kind, .. } => kind,
        }
    }

    /// Full rendering: the value string, or `Kind("message")` for exceptions.
    pub fn full_string(&self) -> String {
        match self {
            ExecutionOutcome::Value(v) => v.clone(),
            ExecutionOutcome::Exception { kind, message } => format!("{kind}(\"{message}\")"),
        }
    }

    /// Parses the `Kind("message")` rendering back into an outcome; anything
    /// else is a plain value.
    pub fn from_full_string(s: &str) -> Self {
        if let Some(open) = s.find("(\"") {
            let kind = &s[..open];
            if s.ends_with("\")")
                && !kind.is_empty()
                && kind.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                let message = &s[open + 2..s.len() - 2];
                return ExecutionOutcome::exception(kind, message);
            }
        }
        ExecutionOutcome::value(s)
    }
}

/// Output shape of a SUT.
///
/// Categorical subjects declare their success classes plus an ordered
/// vocabulary (classes and known exception kinds) used by the output
/// abstraction descriptor. Free-form subjects are compared by string length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputKind {
    Categorical {
        /// Sorted list of legal success values.
        classes: Vec<String>,
        /// Declared enumeration order for the pair-abstraction descriptor.
        /// Cell identity depends on this order staying fixed.
        vocabulary: Vec<String>,
    },
    FreeForm,
}

impl OutputKind {
    /// Categorical output with the default vocabulary: classes merged with the
    /// framework-known exception kinds, sorted.
    pub fn categorical(classes: &[&str]) -> Self {
        let mut classes: Vec<String> = classes.iter().map(|s| s.to_string()).collect();
        classes.sort();
        let mut vocabulary = classes.clone();
        for kind in KNOWN_EXCEPTION_KINDS {
            vocabulary.push(kind.to_string());
        }
        vocabulary.sort();
        vocabulary.dedup();
        OutputKind::Categorical {
            classes,
            vocabulary,
        }
    }

    /// Categorical output with an explicitly ordered vocabulary.
    pub fn categorical_with_vocabulary(classes: &[&str], vocabulary: &[&str]) -> Self {
        let mut classes: Vec<String> = classes.iter().map(|s| s.to_string()).collect();
        classes.sort();
        OutputKind::Categorical {
            classes,
            vocabulary: vocabulary.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Exception kinds the built-in subjects can raise.
pub const KNOWN_EXCEPTION_KINDS: &[&str] =
    &["ArgumentError", "BoundsError", "DivideError", "DomainError"];

type EvalFn = Arc<dyn Fn(&InputPoint) -> ExecutionOutcome + Send + Sync>;

/// A named pure function under test.
#[derive(Clone)]
pub struct SutSpec {
    pub name: String,
    pub arity: usize,
    pub output_kind: OutputKind,
    eval: EvalFn,
}

impl fmt::Debug for SutSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SutSpec")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("output_kind", &self.output_kind)
            .finish()
    }
}

impl SutSpec {
    /// Registers a subject. `eval` must be deterministic and side-effect free.
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        output_kind: OutputKind,
        eval: impl Fn(&InputPoint) -> ExecutionOutcome + Send + Sync + 'static,
    ) -> Self {
        SutSpec {
            name: name.into(),
            arity,
            output_kind,
            eval: Arc::new(eval),
        }
    }

    /// Runs the subject on `point` after checking arity.
    pub fn evaluate(&self, point: &InputPoint) -> Result<ExecutionOutcome> {
        if point.arity() != self.arity {
            return Err(Error::ArityMismatch {
                sut: self.name.clone(),
                expected: self.arity,
                got: point.arity(),
            });
        }
        Ok((self.eval)(point))
    }
}

/// Dispatch wrapper over [`SutSpec::evaluate`].
pub fn evaluate(sut: &SutSpec, point: &InputPoint) -> Result<ExecutionOutcome> {
    sut.evaluate(point)
}

// ---------------------------------------------------------------------------
// bytecount
// ---------------------------------------------------------------------------

/// Largest input the byte formatter accepts; anything above raises BoundsError.
pub const BYTECOUNT_UPPER_BOUND: i128 = 999_999_999_999_994_822_656;

const BYTE_UNITS: &[&str] = &["B", "kB", "MB", "GB", "TB", "PB", "EB"];

/// Human-readable byte formatter over the full accepted range.
///
/// Non-negative inputs scale by decimal-1000 units with one fractional digit
/// (half-up) and roll over so no unit below EB ever displays >= 1000.0.
/// Negative inputs print raw with a bare `B` suffix. The upper bound exceeds
/// the 64-bit input range, so the registered SUT can never trip it; it is
/// reachable through this function directly.
pub fn bytecount_i128(bytes: i128) -> ExecutionOutcome {
    if bytes < 0 {
        return ExecutionOutcome::value(format!("{bytes}B"));
    }
    if bytes > BYTECOUNT_UPPER_BOUND {
        return ExecutionOutcome::exception("BoundsError", "no unit above EB");
    }
    for (k, unit) in BYTE_UNITS.iter().enumerate() {
        let divisor = 1000i128.pow(k as u32);
        let tenths = (10 * bytes + divisor / 2) / divisor;
        if tenths < 10_000 || k == BYTE_UNITS.len() - 1 {
            return ExecutionOutcome::value(format!("{}.{} {unit}", tenths / 10, tenths % 10));
        }
    }
    unreachable!("the EB arm always formats")
}

fn sut_bytecount(p: &InputPoint) -> ExecutionOutcome {
    bytecount_i128(p.0[0] as i128)
}

// ---------------------------------------------------------------------------
// circle
// ---------------------------------------------------------------------------

const CIRCLE_RADIUS: i128 = 80;

fn sut_circle(p: &InputPoint) -> ExecutionOutcome {
    let (x, y) = (p.0[0] as i128, p.0[1] as i128);
    if x == 0 && y == 0 {
        return ExecutionOutcome::exception("DomainError", "Origin");
    }
    if x * x + y * y <= CIRCLE_RADIUS * CIRCLE_RADIUS {
        ExecutionOutcome::value("in")
    } else {
        ExecutionOutcome::value("out")
    }
}

// ---------------------------------------------------------------------------
// bmi
// ---------------------------------------------------------------------------

fn sut_bmi(p: &InputPoint) -> ExecutionOutcome {
    let (h, w) = (p.0[0], p.0[1]);
    if h < 0 || w < 0 {
        return ExecutionOutcome::exception("DomainError", "Negative input");
    }
    let meters = h as f64 / 100.0;
    let b = w as f64 / (meters * meters);
    let class = if b < 18.5 {
        "Underweight"
    } else if b < 23.0 {
        "Normal"
    } else if b < 25.0 {
        "Overweight"
    } else if b < 30.0 {
        "Obese"
    } else {
        // Unconditional final arm so non-finite ratios (h = 0) classify too.
        "Severely obese"
    };
    ExecutionOutcome::value(class)
}

// ---------------------------------------------------------------------------
// date
// ---------------------------------------------------------------------------

fn is_leap_year(y: i64) -> bool {
    y % 4 == 0 && (y % 100 != 0 || y % 400 == 0)
}

fn days_in_month(y: i64, m: i64) -> i64 {
    match m {
        2 => {
            if is_leap_year(y) {
                29
            } else {
                28
            }
        }
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

fn sut_date(p: &InputPoint) -> ExecutionOutcome {
    let (d, m, y) = (p.0[0], p.0[1], p.0[2]);
    // Month is validated before day.
    if !(1..=12).contains(&m) {
        return ExecutionOutcome::exception(
            "ArgumentError",
            format!("Month: {m} out of range (1:12)"),
        );
    }
    let dim = days_in_month(y, m);
    if !(1..=dim).contains(&d) {
        return ExecutionOutcome::exception(
            "ArgumentError",
            format!("Day: {d} out of range (1:{dim})"),
        );
    }
    let sign = if y < 0 { "-" } else { "" };
    ExecutionOutcome::value(format!("{sign}{:04}-{m:02}-{d:02}", y.unsigned_abs()))
}

// ---------------------------------------------------------------------------
// numeric pack
// ---------------------------------------------------------------------------

fn checked_div_parts(x: i64, y: i64) -> Option<(i64, i64)> {
    if y == 0 || (x == i64::MIN && y == -1) {
        return None;
    }
    Some((x / y, x % y))
}

fn sut_cld(p: &InputPoint) -> ExecutionOutcome {
    match checked_div_parts(p.0[0], p.0[1]) {
        Some((q, r)) => {
            let adj = (r != 0 && (p.0[0] < 0) == (p.0[1] < 0)) as i64;
            ExecutionOutcome::value((q + adj).to_string())
        }
        None => ExecutionOutcome::exception("DivideError", "integer division error"),
    }
}

fn sut_fld(p: &InputPoint) -> ExecutionOutcome {
    match checked_div_parts(p.0[0], p.0[1]) {
        Some((q, r)) => {
            let adj = (r != 0 && (p.0[0] < 0) != (p.0[1] < 0)) as i64;
            ExecutionOutcome::value((q - adj).to_string())
        }
        None => ExecutionOutcome::exception("DivideError", "integer division error"),
    }
}

fn sut_fldmod1(p: &InputPoint) -> ExecutionOutcome {
    if checked_div_parts(p.0[0], p.0[1]).is_none() {
        return ExecutionOutcome::exception("DivideError", "integer division error");
    }
    // 1-based flooring division: x == (f - 1) * y + m with m in (0, y] for
    // positive y and [y, 0) for negative y. Intermediate products exceed the
    // i64 range for extreme operands; the final values never do.
    let (x, y) = (p.0[0] as i128, p.0[1] as i128);
    let r = x - y * div_floor_i128(x, y);
    let m = if r == 0 { y } else { r };
    let f = (x - m) / y + 1;
    ExecutionOutcome::value(format!("({f}, {m})"))
}

fn div_floor_i128(x: i128, y: i128) -> i128 {
    let q = x / y;
    let r = x % y;
    q - (r != 0 && (x < 0) != (y < 0)) as i128
}

fn sut_max(p: &InputPoint) -> ExecutionOutcome {
    ExecutionOutcome::value(p.0[0].max(p.0[1]).to_string())
}

fn sut_power_by_squaring(p: &InputPoint) -> ExecutionOutcome {
    let (mut base, exp) = (p.0[0], p.0[1]);
    if exp < 0 {
        return ExecutionOutcome::exception(
            "DomainError",
            "Cannot raise an integer to a negative power",
        );
    }
    let mut exp = exp as u64;
    let mut acc = 1i64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc.wrapping_mul(base);
        }
        base = base.wrapping_mul(base);
        exp >>= 1;
    }
    ExecutionOutcome::value(acc.to_string())
}

fn sut_sign(p: &InputPoint) -> ExecutionOutcome {
    match p.0[0] {
        0 => ExecutionOutcome::exception("DomainError", "Zero"),
        x if x > 0 => ExecutionOutcome::value("Positive"),
        _ => ExecutionOutcome::value("Negative"),
    }
}

// ---------------------------------------------------------------------------
// registry
// ---------------------------------------------------------------------------

/// Enumeration order behind the circle cell coordinates; changing it breaks
/// recorded cell identity.
const CIRCLE_VOCABULARY: &[&str] = &[
    "ArgumentError",
    "DomainError",
    "ErrorException",
    "in",
    "out",
];

/// Enumeration order behind the bmi cell coordinates; changing it breaks
/// recorded cell identity.
const BMI_VOCABULARY: &[&str] = &[
    "Severely obese",
    "DomainError",
    "Underweight",
    "Normal",
    "Overweight",
    "Obese",
    "ArgumentError",
];

/// The numeric subjects: cld, fld, fldmod1, max, power_by_squaring, sign.
pub fn sut_numeric_pack() -> Vec<SutSpec> {
    vec![
        SutSpec::new("cld", 2, OutputKind::FreeForm, sut_cld),
        SutSpec::new("fld", 2, OutputKind::FreeForm, sut_fld),
        SutSpec::new("fldmod1", 2, OutputKind::FreeForm, sut_fldmod1),
        SutSpec::new("max", 2, OutputKind::FreeForm, sut_max),
        SutSpec::new(
            "power_by_squaring",
            2,
            OutputKind::FreeForm,
            sut_power_by_squaring,
        ),
        SutSpec::new(
            "sign",
            1,
            OutputKind::categorical(&["Negative", "Positive"]),
            sut_sign,
        ),
    ]
}

/// All built-in subjects.
pub fn registry() -> Vec<SutSpec> {
    let mut suts = vec![
        SutSpec::new("bytecount", 1, OutputKind::FreeForm, sut_bytecount),
        SutSpec::new(
            "circle",
            2,
            OutputKind::categorical_with_vocabulary(&["in", "out"], CIRCLE_VOCABULARY),
            sut_circle,
        ),
        SutSpec::new(
            "bmi",
            2,
            OutputKind::categorical_with_vocabulary(
                &[
                    "Underweight",
                    "Normal",
                    "Overweight",
                    "Obese",
                    "Severely obese",
                ],
                BMI_VOCABULARY,
            ),
            sut_bmi,
        ),
        SutSpec::new("date", 3, OutputKind::FreeForm, sut_date),
    ];
    suts.extend(sut_numeric_pack());
    suts
}

/// Looks up a built-in subject by name.
pub fn find_sut(name: &str) -> Result<SutSpec> {
    registry()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::SutNotFound(name.to_string()))
}
