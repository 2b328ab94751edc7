//! `X = Y x Z` with the shift `s(y, z) = (y, z+1)`, windowed partial
//! operations, parallelism, and the clones `Pol(s^n)`.
//!
//! Operations are finite partial maps whose coordinates all lie in a level
//! window `[lo, hi]`. Every equivariance test only looks at pairs of tuples
//! that both lie in the domain.

mod construct;
pub mod sample;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use construct::{
    divisibility_counterexample, interpolate_pol_s, periodic_op, separate, shift_op,
    theorem_interpolation, unary_reduction, PairSeparator, SeparatorKind, Separator, ShiftMap,
    ShiftRecipe, TheoremInterpolation, UnaryReduction,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShiftError {
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("window [{0}, {1}] is empty")]
    EmptyWindow(i64, i64),
    #[error("tuple {0:?} has the wrong length for arity {1}")]
    BadTuple(Vec<Point>, usize),
    #[error("{0} lies outside the window {1}")]
    OutsideWindow(Point, Window),
    #[error("conflicting values at {0:?}")]
    Conflict(Vec<Point>),
    #[error("tuples {first} and {second} are parallel (offset {offset})")]
    Parallel {
        first: usize,
        second: usize,
        offset: i64,
    },
    #[error("operation is undefined at {0:?}")]
    Undefined(Vec<Point>),
    #[error("operations must share one window")]
    WindowMismatch,
    #[error("expected a unary operation")]
    NotUnary,
    #[error("no list of operations given")]
    NoOperations,
    #[error("operation commutes with s on the whole window")]
    NoViolation,
    #[error("offset must be non-zero")]
    ZeroOffset,
    #[error("tuples are not parallel, so nothing needs separating")]
    NothingToSeparate,
    #[error("second tuple is not the first shifted by {0}")]
    NotShifted(i64),
    #[error("d({c}+{offset}) = d({c})+{offset} or is undefined")]
    NoSeparatorWitness { c: Point, offset: i64 },
    #[error("operation is not in Pol(s^{0}) on its window")]
    NotEquivariant(u64),
    #[error("no witness separates tuples {0} and {1}")]
    InsufficientWitnesses(usize, usize),
    #[error("construction postcondition failed: {0}")]
    Postcondition(String),
}

/// A point `(component, level)` of `Y x Z`; JSON `[component, level]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(u32, i64)", into = "(u32, i64)")]
pub struct Point {
    pub component: u32,
    pub level: i64,
}

impl Point {
    pub fn new(component: u32, level: i64) -> Self {
        Point { component, level }
    }
}

impl From<(u32, i64)> for Point {
    fn from((component, level): (u32, i64)) -> Self {
        Point { component, level }
    }
}

impl From<Point> for (u32, i64) {
    fn from(p: Point) -> Self {
        (p.component, p.level)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.component, self.level)
    }
}

/// Inclusive level range; JSON `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct Window {
    lo: i64,
    hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self, ShiftError> {
        if lo > hi {
            return Err(ShiftError::EmptyWindow(lo, hi));
        }
        Ok(Window { lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    /// `hi - lo`, the largest offset two in-window levels can have.
    pub fn span(&self) -> i64 {
        self.hi - self.lo
    }

    pub fn contains(&self, level: i64) -> bool {
        self.lo <= level && level <= self.hi
    }

    pub fn contains_tuple(&self, t: &[Point]) -> bool {
        t.iter().all(|p| self.contains(p.level))
    }

    /// The window shrunk by `margin` on both sides, if anything is left.
    pub fn inner(&self, margin: i64) -> Option<Window> {
        Window::new(self.lo + margin, self.hi - margin).ok()
    }

    /// Offsets `t` with `tuple + t` inside the window.
    pub fn shifts_of(&self, t: &[Point]) -> std::ops::RangeInclusive<i64> {
        let min = t.iter().map(|p| p.level).min().unwrap_or(0);
        let max = t.iter().map(|p| p.level).max().unwrap_or(0);
        (self.lo - min)..=(self.hi - max)
    }

    /// All points with components below `y_count`.
    pub fn points(&self, y_count: u32) -> impl Iterator<Item = Point> + '_ {
        (0..y_count).flat_map(move |c| (self.lo..=self.hi).map(move |l| Point::new(c, l)))
    }
}

impl TryFrom<(i64, i64)> for Window {
    type Error = ShiftError;
    fn try_from((lo, hi): (i64, i64)) -> Result<Self, ShiftError> {
        Window::new(lo, hi)
    }
}

impl From<Window> for (i64, i64) {
    fn from(w: Window) -> Self {
        (w.lo, w.hi)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// `s^n(p)`.
pub fn shift(p: Point, n: i64) -> Point {
    Point::new(p.component, p.level + n)
}

/// `t + n`, coordinatewise.
pub fn shift_tuple(t: &[Point], n: i64) -> Vec<Point> {
    t.iter().map(|&p| shift(p, n)).collect()
}

/// A finite partial operation on `Y x Z` inside a level window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawWindowedOp", into = "RawWindowedOp")]
pub struct WindowedOp {
    arity: usize,
    window: Window,
    entries: BTreeMap<Vec<Point>, Point>,
}

#[derive(Serialize, Deserialize)]
struct RawWindowedOp {
    arity: usize,
    entries: Vec<(Vec<Point>, Point)>,
    window: Window,
}

impl TryFrom<RawWindowedOp> for WindowedOp {
    type Error = ShiftError;
    fn try_from(raw: RawWindowedOp) -> Result<Self, ShiftError> {
        WindowedOp::new(raw.arity, raw.window, raw.entries)
    }
}

impl From<WindowedOp> for RawWindowedOp {
    fn from(f: WindowedOp) -> Self {
        RawWindowedOp {
            arity: f.arity,
            entries: f.entries.into_iter().collect(),
            window: f.window,
        }
    }
}

impl WindowedOp {
    /// Validates lengths and levels. Repeated keys are fine if they agree.
    pub fn new(
        arity: usize,
        window: Window,
        entries: impl IntoIterator<Item = (Vec<Point>, Point)>,
    ) -> Result<Self, ShiftError> {
        let mut f = WindowedOp::empty(arity, window)?;
        for (k, v) in entries {
            f.insert(k, v)?;
        }
        Ok(f)
    }

    pub fn empty(arity: usize, window: Window) -> Result<Self, ShiftError> {
        if arity == 0 {
            return Err(ShiftError::ZeroArity);
        }
        Ok(WindowedOp {
            arity,
            window,
            entries: BTreeMap::new(),
        })
    }

    /// Tabulates `f` on `domain`, skipping tuples where it returns `None`
    /// or leaves the window.
    pub fn from_fn(
        arity: usize,
        window: Window,
        domain: impl IntoIterator<Item = Vec<Point>>,
        f: impl Fn(&[Point]) -> Option<Point>,
    ) -> Result<Self, ShiftError> {
        let mut op = WindowedOp::empty(arity, window)?;
        for t in domain {
            if !window.contains_tuple(&t) {
                continue;
            }
            if let Some(v) = f(&t) {
                if window.contains(v.level) {
                    op.insert(t, v)?;
                }
            }
        }
        Ok(op)
    }

    pub fn insert(&mut self, key: Vec<Point>, value: Point) -> Result<(), ShiftError> {
        if key.len() != self.arity {
            return Err(ShiftError::BadTuple(key, self.arity));
        }
        for &p in key.iter().chain(std::iter::once(&value)) {
            if !self.window.contains(p.level) {
                return Err(ShiftError::OutsideWindow(p, self.window));
            }
        }
        match self.entries.get(&key) {
            Some(&old) if old != value => Err(ShiftError::Conflict(key)),
            _ => {
                self.entries.insert(key, value);
                Ok(())
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, t: &[Point]) -> Option<Point> {
        self.entries.get(t).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<Point>, Point)> + '_ {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    /// Entries whose tuple and value lie in `window`.
    pub fn restrict(&self, window: Window) -> WindowedOp {
        WindowedOp {
            arity: self.arity,
            window,
            entries: self
                .entries
                .iter()
                .filter(|(k, v)| window.contains_tuple(k) && window.contains(v.level))
                .map(|(k, &v)| (k.clone(), v))
                .collect(),
        }
    }
}

/// Offset restriction for [`parallel_offset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Any,
    /// Only multiples of `n`; `Multiple(0)` admits offset 0 alone.
    Multiple(u64),
}

impl Step {
    fn admits(self, offset: i64) -> bool {
        match self {
            Step::Any => true,
            Step::Multiple(0) => offset == 0,
            Step::Multiple(n) => offset.rem_euclid(n as i64) == 0,
        }
    }
}

/// The `l` with `b = a + l`, if there is one and `step` admits it.
pub fn parallel_offset(a: &[Point], b: &[Point], step: Step) -> Option<i64> {
    if a.len() != b.len() {
        return None;
    }
    let mut offset = None;
    for (p, q) in a.iter().zip(b) {
        if p.component != q.component {
            return None;
        }
        let d = q.level - p.level;
        match offset {
            None => offset = Some(d),
            Some(o) if o != d => return None,
            _ => {}
        }
    }
    let offset = offset.unwrap_or(0);
    step.admits(offset).then_some(offset)
}

type OrbitKey = (Vec<u32>, Vec<i64>, i64);

/// Grouping key for the `s^n`-orbit of a tuple: components, levels relative
/// to the first coordinate, and the first level modulo `n`.
fn orbit_key(t: &[Point], n: u64) -> OrbitKey {
    let base = t[0].level;
    (
        t.iter().map(|p| p.component).collect(),
        t.iter().map(|p| p.level - base).collect(),
        base.rem_euclid(n as i64),
    )
}

/// `f ∈ Pol(s^n)` on the window: `f(a + jn) = f(a) + jn` whenever both
/// sides are defined, for every integer `j`. `n = 0` always holds.
///
/// Comparing all multiples and not only `a` and `a + n` makes the test
/// exact for extension: it holds iff some total member of `Pol(s^n)`
/// agrees with `f` on its domain.
pub fn pol_sn_member(f: &WindowedOp, n: u64) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen: HashMap<OrbitKey, (u32, i64)> = HashMap::new();
    for (t, v) in f.entries() {
        let normal = (v.component, v.level - t[0].level);
        match seen.entry(orbit_key(t, n)) {
            std::collections::hash_map::Entry::Occupied(e) => {
                if *e.get() != normal {
                    return false;
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(normal);
            }
        }
    }
    true
}

/// Windowed estimate of `G_D` for unary generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShiftGroupReport {
    pub window: Window,
    /// `n` with `|n| <= hi - lo` for which every op passes
    /// [`pol_sn_member`] at `|n|`.
    pub members: Vec<i64>,
    /// Least positive member, or 0.
    pub n_star: u64,
    pub caveat: &'static str,
}

pub const SHIFT_GROUP_CAVEAT: &str =
    "equivariance outside the window is not observed; members over-approximate the group";

pub fn shift_group(ops: &[WindowedOp]) -> Result<ShiftGroupReport, ShiftError> {
    let window = ops.first().ok_or(ShiftError::NoOperations)?.window();
    for f in ops {
        if f.arity() != 1 {
            return Err(ShiftError::NotUnary);
        }
        if f.window() != window {
            return Err(ShiftError::WindowMismatch);
        }
    }
    let span = window.span();
    let positive: Vec<i64> = (1..=span)
        .filter(|&n| ops.iter().all(|f| pol_sn_member(f, n as u64)))
        .collect();
    let n_star = positive.first().copied().unwrap_or(0) as u64;
    let mut members: Vec<i64> = positive.iter().rev().map(|n| -n).collect();
    members.push(0);
    members.extend(positive);
    Ok(ShiftGroupReport {
        window,
        members,
        n_star,
        caveat: SHIFT_GROUP_CAVEAT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi).unwrap()
    }

    fn p(c: u32, l: i64) -> Point {
        Point::new(c, l)
    }

    #[test]
    fn shifting() {
        let a = p(2, -1);
        assert_eq!(shift(a, 0), a);
        assert_eq!(shift(p(0, 3), 1), p(0, 4));
        assert_eq!(shift(shift(a, 5), -5), a);
    }

    #[test]
    fn offsets() {
        let a = [p(0, 0), p(0, 3)];
        assert_eq!(parallel_offset(&a, &a, Step::Any), Some(0));
        assert_eq!(parallel_offset(&a, &[p(0, 1), p(0, 4)], Step::Any), Some(1));
        assert_eq!(parallel_offset(&[p(0, 0), p(0, 1)], &[p(0, 0), p(0, 2)], Step::Any), None);
        assert_eq!(parallel_offset(&[p(0, 0)], &[p(1, 0)], Step::Any), None);
        assert_eq!(parallel_offset(&[p(0, 0)], &[p(0, 6)], Step::Multiple(3)), Some(6));
        assert_eq!(parallel_offset(&[p(0, 0)], &[p(0, 6)], Step::Multiple(4)), None);
        assert_eq!(parallel_offset(&[p(0, 0)], &[p(0, 6)], Step::Multiple(0)), None);
    }

    #[test]
    fn membership() {
        let win = w(-4, 4);
        let id = WindowedOp::from_fn(1, win, win.points(2).map(|x| vec![x]), |t| Some(t[0])).unwrap();
        assert!((0..6).all(|n| pol_sn_member(&id, n)));
        let s = shift_op(2, win).unwrap();
        assert!(pol_sn_member(&s, 1));
        let d = WindowedOp::from_fn(1, win, (-4..=4).map(|z| vec![p(0, z)]), |t| {
            let z = t[0].level;
            Some(p(0, z + z.rem_euclid(2)))
        })
        .unwrap();
        assert!(pol_sn_member(&d, 2));
        assert!(!pol_sn_member(&d, 1));
        assert!(pol_sn_member(&d, 0));
    }

    #[test]
    fn membership_sees_gaps() {
        let win = w(0, 10);
        let f = WindowedOp::new(1, win, [(vec![p(0, 0)], p(0, 0)), (vec![p(0, 4)], p(0, 5))]).unwrap();
        // 0 and 4 differ by 2 * 2 even though 2 itself is missing
        assert!(!pol_sn_member(&f, 2));
        assert!(pol_sn_member(&f, 3));
    }

    #[test]
    fn groups() {
        let win = w(-8, 8);
        let id = WindowedOp::from_fn(1, win, win.points(2).map(|x| vec![x]), |t| Some(t[0])).unwrap();
        let r = shift_group(&[id]).unwrap();
        assert_eq!(r.n_star, 1);
        assert_eq!(r.members.len(), 33);
        let d = periodic_op(2, win, 2).unwrap();
        let r = shift_group(&[d]).unwrap();
        assert_eq!(r.n_star, 2);
        assert!(r.members.iter().all(|n| n % 2 == 0));
        assert!(r.members.contains(&-4) && r.members.contains(&0));
        assert_eq!(shift_group(&[]).unwrap_err(), ShiftError::NoOperations);
    }

    #[test]
    fn validation() {
        let win = w(0, 3);
        assert!(matches!(
            WindowedOp::new(1, win, [(vec![p(0, 4)], p(0, 0))]),
            Err(ShiftError::OutsideWindow(..))
        ));
        assert!(matches!(
            WindowedOp::new(1, win, [(vec![p(0, 1)], p(0, 0)), (vec![p(0, 1)], p(0, 2))]),
            Err(ShiftError::Conflict(_))
        ));
        assert!(Window::new(2, 1).is_err());
    }

    #[test]
    fn json_shape() {
        let f = WindowedOp::new(2, w(-1, 1), [(vec![p(0, 0), p(1, -1)], p(0, 1))]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"arity":2,"entries":[[[[0,0],[1,-1]],[0,1]]],"window":[-1,1]}"#);
        let back: WindowedOp = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<WindowedOp>(
            r#"{"arity":1,"entries":[[[[0,5]],[0,0]]],"window":[-1,1]}"#
        )
        .is_err());
    }
}
