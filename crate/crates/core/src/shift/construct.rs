use std::collections::BTreeMap;

use serde::Serialize;

use super::{
    parallel_offset, pol_sn_member, shift, shift_group, shift_tuple, Point, ShiftError,
    ShiftGroupReport, Step, WindowedOp, Window,
};

/// `s` itself on the points of `y_count` components.
pub fn shift_op(y_count: u32, window: Window) -> Result<WindowedOp, ShiftError> {
    WindowedOp::from_fn(1, window, window.points(y_count).map(|x| vec![x]), |t| {
        Some(shift(t[0], 1))
    })
}

/// `d(y, z) = (y, z + (z mod n))`: commutes with `s^n` and with no shift by
/// a non-multiple of `n`.
pub fn periodic_op(y_count: u32, window: Window, n: u64) -> Result<WindowedOp, ShiftError> {
    if n == 0 {
        return Err(ShiftError::ZeroOffset);
    }
    WindowedOp::from_fn(1, window, window.points(y_count).map(|x| vec![x]), |t| {
        let z = t[0].level;
        Some(Point::new(t[0].component, z + z.rem_euclid(n as i64)))
    })
}

/// A member of `Pol(s^n)` outside `Pol(s^m)`, or `None` when `n | m`.
pub fn divisibility_counterexample(
    n: u64,
    m: u64,
    y_count: u32,
    window: Window,
) -> Result<Option<WindowedOp>, ShiftError> {
    if n == 0 || m.is_multiple_of(n) {
        return Ok(None);
    }
    let d = periodic_op(y_count, window, n)?;
    if !pol_sn_member(&d, n) {
        return Err(ShiftError::NotEquivariant(n));
    }
    if pol_sn_member(&d, m) {
        return Err(ShiftError::Postcondition(format!(
            "window {window} too narrow to separate {n} from {m}"
        )));
    }
    Ok(Some(d))
}

/// The unique shift-equivariant extension of `a_l -> b_l` to every in-window
/// shift `a_l + t` whose value `b_l + t` stays in the window.
pub fn interpolate_pol_s(pairs: &[(Vec<Point>, Point)], window: Window) -> Result<WindowedOp, ShiftError> {
    let arity = pairs.first().ok_or(ShiftError::NoOperations)?.0.len();
    let mut f = WindowedOp::empty(arity, window)?;
    for (i, (a, b)) in pairs.iter().enumerate() {
        if a.len() != arity {
            return Err(ShiftError::BadTuple(a.clone(), arity));
        }
        for &p in a.iter().chain(std::iter::once(b)) {
            if !window.contains(p.level) {
                return Err(ShiftError::OutsideWindow(p, window));
            }
        }
        for (j, (a2, _)) in pairs.iter().enumerate().skip(i + 1) {
            if let Some(offset) = parallel_offset(a, a2, Step::Any) {
                return Err(ShiftError::Parallel {
                    first: i,
                    second: j,
                    offset,
                });
            }
        }
        for t in window.shifts_of(a) {
            let v = shift(*b, t);
            if window.contains(v.level) {
                f.insert(shift_tuple(a, t), v)?;
            }
        }
    }
    Ok(f)
}

/// A total unary member of `Pol(s)`: each listed component is moved to a
/// target component with a level offset, the rest are fixed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ShiftMap {
    pub moves: BTreeMap<u32, (u32, i64)>,
}

impl ShiftMap {
    /// The map sending `from` to `to`, moving `from`'s whole component.
    pub fn sending(from: Point, to: Point) -> Self {
        let mut moves = BTreeMap::new();
        moves.insert(from.component, (to.component, to.level - from.level));
        ShiftMap { moves }
    }

    pub fn apply(&self, p: Point) -> Point {
        match self.moves.get(&p.component) {
            Some(&(c, t)) => Point::new(c, p.level + t),
            None => p,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnaryReduction {
    /// Smallest `a` with `g(a + 1) != g(a) + 1`.
    pub witness: Vec<Point>,
    /// `f_i` with `f_i(b) = a_i`.
    pub maps: Vec<WindowedOp>,
    /// `g(f_1(x), .., f_k(x))` along the orbit of `b`.
    pub h: WindowedOp,
}

/// Turns a `k`-ary violation of `Pol(s)` into a unary one at `b`.
pub fn unary_reduction(g: &WindowedOp, b: Point) -> Result<UnaryReduction, ShiftError> {
    let window = g.window();
    let witness = g
        .entries()
        .find(|(a, v)| matches!(g.get(&shift_tuple(a, 1)), Some(v1) if v1 != shift(*v, 1)))
        .map(|(a, _)| a.clone())
        .ok_or(ShiftError::NoViolation)?;
    for p in [b, shift(b, 1)] {
        if !window.contains(p.level) {
            return Err(ShiftError::OutsideWindow(p, window));
        }
    }
    let maps: Vec<WindowedOp> = witness
        .iter()
        .map(|&a| interpolate_pol_s(&[(vec![b], a)], window))
        .collect::<Result<_, _>>()?;
    let orbit = window.shifts_of(&[b]).map(|t| vec![shift(b, t)]);
    let h = WindowedOp::from_fn(1, window, orbit, |x| {
        let args: Option<Vec<Point>> = maps.iter().map(|f| f.get(x)).collect();
        g.get(&args?)
    })?;
    match (h.get(&[b]), h.get(&[shift(b, 1)])) {
        (Some(hb), Some(hb1)) if hb1 != shift(hb, 1) => Ok(UnaryReduction { witness, maps, h }),
        _ => Err(ShiftError::Postcondition("h(b+1) = h(b)+1".into())),
    }
}

/// `f = d ∘ g ∘ π_1` with `g(a_1) = c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Separator {
    pub g: ShiftMap,
    pub c: Point,
    pub offset: i64,
}

impl Separator {
    pub fn eval(&self, d: &WindowedOp, x: &[Point]) -> Option<Point> {
        d.get(&[self.g.apply(*x.first()?)])
    }

    /// `f` tabulated on the given tuples.
    pub fn materialize(
        &self,
        d: &WindowedOp,
        arity: usize,
        domain: impl IntoIterator<Item = Vec<Point>>,
    ) -> Result<WindowedOp, ShiftError> {
        WindowedOp::from_fn(arity, d.window(), domain, |x| self.eval(d, x))
    }
}

/// Builds `f = d ∘ g ∘ π_1` that makes `(a, f(a))` and `(b, f(b))`
/// non-parallel, where `b = a + l` and `d(c + l) != d(c) + l`.
pub fn separate(a: &[Point], b: &[Point], d: &WindowedOp, c: Point) -> Result<Separator, ShiftError> {
    if d.arity() != 1 {
        return Err(ShiftError::NotUnary);
    }
    let offset = parallel_offset(a, b, Step::Any).ok_or(ShiftError::NothingToSeparate)?;
    if offset == 0 {
        return Err(ShiftError::ZeroOffset);
    }
    match (d.get(&[c]), d.get(&[shift(c, offset)])) {
        (Some(dc), Some(dcl)) if dcl != shift(dc, offset) => {}
        _ => return Err(ShiftError::NoSeparatorWitness { c, offset }),
    }
    let sep = Separator {
        g: ShiftMap::sending(a[0], c),
        c,
        offset,
    };
    let ext = |x: &[Point]| -> Result<Vec<Point>, ShiftError> {
        let v = sep.eval(d, x).ok_or_else(|| ShiftError::Undefined(x.to_vec()))?;
        let mut t = x.to_vec();
        t.push(v);
        Ok(t)
    };
    if parallel_offset(&ext(a)?, &ext(b)?, Step::Any).is_some() {
        return Err(ShiftError::Postcondition("extended tuples stay parallel".into()));
    }
    Ok(sep)
}

/// Witness points `c` for offset `l` in `d`, nearest to `anchor` first.
fn separator_candidates(d: &WindowedOp, offset: i64, anchor: Point) -> Vec<Point> {
    let mut out: Vec<Point> = d
        .entries()
        .filter_map(|(x, v)| {
            let c = x[0];
            let dv = d.get(&[shift(c, offset)])?;
            (dv != shift(v, offset)).then_some(c)
        })
        .collect();
    out.sort_by_key(|c| {
        let tau = c.level - anchor.level;
        (tau.abs(), tau, c.component)
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum SeparatorKind {
    /// The pair is not parallel; `π_1` serves.
    Projection,
    Built { witness: usize, separator: Separator },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairSeparator {
    pub pair: (usize, usize),
    pub kind: SeparatorKind,
}

/// `f(x) = h(x, f_i(x) : i ∈ I)` as an evaluable term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShiftRecipe {
    pub arity: usize,
    pub h: WindowedOp,
    pub witnesses: Vec<WindowedOp>,
    pub separators: Vec<PairSeparator>,
}

impl ShiftRecipe {
    pub fn separator_value(&self, i: usize, x: &[Point]) -> Option<Point> {
        match &self.separators[i].kind {
            SeparatorKind::Projection => x.first().copied(),
            SeparatorKind::Built { witness, separator } => separator.eval(&self.witnesses[*witness], x),
        }
    }

    /// `(x, f_i(x) : i ∈ I)`.
    pub fn extend(&self, x: &[Point]) -> Option<Vec<Point>> {
        let mut t = x.to_vec();
        for i in 0..self.separators.len() {
            t.push(self.separator_value(i, x)?);
        }
        Some(t)
    }

    pub fn eval(&self, x: &[Point]) -> Option<Point> {
        if x.len() != self.arity {
            return None;
        }
        self.h.get(&self.extend(x)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremInterpolation {
    /// The recipe tabulated on every in-window shift of the input tuples
    /// where it is defined.
    pub op: WindowedOp,
    pub recipe: ShiftRecipe,
    pub n_star: u64,
    /// `None` when no witnesses were given, so `D = Pol(s)`.
    pub group: Option<ShiftGroupReport>,
}

/// Interpolates `g ∈ Pol(s^{n*})` on tuples that are pairwise not
/// `s^{n*}`-parallel by a term over `Pol(s)` and the unary witnesses.
///
/// `n*` is read off the witnesses. Each pair of tuples gets a separator
/// `f_i`, the tuples are extended by the separator values, and `h ∈ Pol(s)`
/// is interpolated on the extended tuples.
pub fn theorem_interpolation(
    g: &WindowedOp,
    tuples: &[Vec<Point>],
    witnesses: &[WindowedOp],
) -> Result<TheoremInterpolation, ShiftError> {
    let window = g.window();
    let k = g.arity();
    let group = if witnesses.is_empty() {
        None
    } else {
        Some(shift_group(witnesses)?)
    };
    let n_star = group.as_ref().map_or(1, |r| r.n_star);
    if tuples.is_empty() {
        return Err(ShiftError::NoOperations);
    }
    if let Some(t) = tuples.iter().find(|t| t.len() != k) {
        return Err(ShiftError::BadTuple(t.clone(), k));
    }
    if !pol_sn_member(g, n_star) {
        return Err(ShiftError::NotEquivariant(n_star));
    }
    let n = tuples.len();
    for i in 0..n {
        for j in i + 1..n {
            if let Some(offset) = parallel_offset(&tuples[i], &tuples[j], Step::Multiple(n_star)) {
                return Err(ShiftError::Parallel {
                    first: i,
                    second: j,
                    offset,
                });
            }
        }
    }
    let targets: Vec<Point> = tuples
        .iter()
        .map(|t| g.get(t).ok_or_else(|| ShiftError::Undefined(t.clone())))
        .collect::<Result<_, _>>()?;

    let mut separators = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let kind = match parallel_offset(&tuples[i], &tuples[j], Step::Any) {
                None => SeparatorKind::Projection,
                Some(offset) => {
                    find_separator(&tuples[i], &tuples[j], offset, tuples, witnesses)
                        .ok_or(ShiftError::InsufficientWitnesses(i, j))?
                }
            };
            separators.push(PairSeparator { pair: (i, j), kind });
        }
    }
    let mut recipe = ShiftRecipe {
        arity: k,
        h: WindowedOp::empty(k + separators.len(), window)?,
        witnesses: witnesses.to_vec(),
        separators,
    };
    let extended: Vec<(Vec<Point>, Point)> = tuples
        .iter()
        .zip(&targets)
        .map(|(t, &b)| {
            recipe
                .extend(t)
                .map(|c| (c, b))
                .ok_or_else(|| ShiftError::Undefined(t.clone()))
        })
        .collect::<Result<_, _>>()?;
    recipe.h = interpolate_pol_s(&extended, window)?;

    let domain = tuples
        .iter()
        .flat_map(|t| window.shifts_of(t).map(move |s| shift_tuple(t, s)));
    let op = WindowedOp::from_fn(k, window, domain, |x| recipe.eval(x))?;
    for (t, &b) in tuples.iter().zip(&targets) {
        if op.get(t) != Some(b) {
            return Err(ShiftError::Postcondition(format!("f({t:?}) != g({t:?})")));
        }
    }
    if !pol_sn_member(&op, n_star) {
        return Err(ShiftError::Postcondition(format!("f is not in Pol(s^{n_star})")));
    }
    Ok(TheoremInterpolation {
        op,
        recipe,
        n_star,
        group,
    })
}

/// First witness and nearest `c` whose separator is defined on every tuple.
fn find_separator(
    a: &[Point],
    b: &[Point],
    offset: i64,
    tuples: &[Vec<Point>],
    witnesses: &[WindowedOp],
) -> Option<SeparatorKind> {
    for (w, d) in witnesses.iter().enumerate() {
        for c in separator_candidates(d, offset, a[0]) {
            let Ok(separator) = separate(a, b, d, c) else {
                continue;
            };
            if tuples.iter().all(|t| separator.eval(d, t).is_some()) {
                return Some(SeparatorKind::Built { witness: w, separator });
            }
        }
    }
    None
}
