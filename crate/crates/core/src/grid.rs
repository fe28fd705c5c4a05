//! Reflection-symmetric grids on `[0, 1]`, Stieltjes quadrature against a
//! [`SpinMeasure`], and grid-sampled distribution functions.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::SpinMeasure;

/// Default number of uniform intervals.
pub const DEFAULT_INTERVALS: usize = 1 << 12;

const LOCATE_TOL: f64 = 1e-12;

/// Strictly increasing points `0 = z_0 < ... < z_K = 1` with
/// `z_{K-i} = 1 - z_i`, split into smooth segments at breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    /// Indices of segment boundaries, always including `0` and `len - 1`.
    boundaries: Vec<usize>,
}

impl Grid {
    pub fn uniform(intervals: usize) -> Result<Self> {
        Self::with_breakpoints(intervals, &[])
    }

    /// Uniform grid with `intervals` cells, augmented by `breakpoints` and
    /// their reflections. Uniform points closer than a quarter cell to a
    /// breakpoint are dropped.
    pub fn with_breakpoints(intervals: usize, breakpoints: &[f64]) -> Result<Self> {
        if intervals < 2 || intervals % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid needs an even number of intervals >= 2, got {intervals}"
            )));
        }
        let h = 1.0 / intervals as f64;
        // Work on the lower half and mirror, so reflection is index-exact.
        let mut marks: Vec<f64> = breakpoints
            .iter()
            .filter(|&&b| b > 0.0 && b < 1.0)
            .map(|&b| if b > 0.5 { 1.0 - b } else { b })
            .collect();
        marks.sort_by(f64::total_cmp);
        marks.dedup_by(|a, b| (*a - *b).abs() <= LOCATE_TOL);

        let mut lower: Vec<(f64, bool)> = (0..=intervals / 2)
            .map(|i| i as f64 * h)
            .enumerate()
            .filter(|&(i, z)| i == 0 || marks.iter().all(|&b| (z - b).abs() >= 0.25 * h))
            .map(|(_, z)| z)
            .map(|z| (z, false))
            .collect();
        lower.extend(marks.iter().map(|&b| (b, true)));
        lower.sort_by(|a, b| a.0.total_cmp(&b.0));
        lower.dedup_by(|a, b| {
            if (a.0 - b.0).abs() <= LOCATE_TOL {
                b.1 |= a.1;
                true
            } else {
                false
            }
        });
        let has_half = lower.last().map_or(false, |&(z, _)| z == 0.5);
        let mirror: Vec<(f64, bool)> = lower
            .iter()
            .rev()
            .skip(usize::from(has_half))
            .map(|&(z, b)| (1.0 - z, b))
            .collect();
        lower.extend(mirror);

        let points: Vec<f64> = lower.iter().map(|p| p.0).collect();
        let last = points.len() - 1;
        let boundaries = lower
            .iter()
            .enumerate()
            .filter(|(i, p)| *i == 0 || *i == last || p.1)
            .map(|(i, _)| i)
            .collect();
        Ok(Self { points, boundaries })
    }

    /// Grid carrying every breakpoint of `measure`.
    pub fn for_measure(measure: &SpinMeasure, intervals: usize) -> Result<Self> {
        Self::with_breakpoints(intervals, &measure.breakpoints())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Index of the point `1 - z_i`.
    #[inline]
    pub fn reflect(&self, i: usize) -> usize {
        self.points.len() - 1 - i
    }

    /// Index of the grid point equal to `x` (within `1e-12`).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let i = self.points.partition_point(|&z| z < x - LOCATE_TOL);
        (i < self.points.len() && (self.points[i] - x).abs() <= LOCATE_TOL).then_some(i)
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundaries.binary_search(&i).is_ok()
    }

    /// Consecutive `(start, end)` index pairs of the smooth segments.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.boundaries.windows(2).map(|w| (w[0], w[1]))
    }

    /// Linear interpolation of grid samples at an arbitrary `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let j = self.points.partition_point(|&z| z <= x);
        if j == 0 {
            return values[0];
        }
        if j >= self.points.len() {
            return values[self.points.len() - 1];
        }
        let (a, b) = (self.points[j - 1], self.points[j]);
        let t = (x - a) / (b - a);
        values[j - 1] + t * (values[j] - values[j - 1])
    }
}

/// Interpolatory rule for one cell: `integral ≈ sum_k weights[k] * g[first + k]`.
#[derive(Clone, Copy, Debug)]
struct CellRule {
    first: usize,
    len: usize,
    weights: [f64; 4],
}

/// Weights of the Lagrange interpolant through `nodes`, integrated against
/// `density` over `[a, b]`.
fn lagrange_cell_weights(nodes: &[f64], a: f64, b: f64, density: impl Fn(f64) -> f64) -> [f64; 4] {
    // 5-point Gauss-Legendre: exact for the cubic basis times any quintic,
    // so the smooth density costs nothing visible at double precision.
    const GL: [(f64, f64); 5] = [
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.0, 0.568_888_888_888_888_9),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut w = [0.0; 4];
    for &(t, gw) in &GL {
        let x = mid + half * t;
        let scale = gw * half * density(x);
        for (k, wk) in w.iter_mut().enumerate().take(nodes.len()) {
            let basis: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &xj)| (x - xj) / (nodes[k] - xj))
                .product();
            *wk += scale * basis;
        }
    }
    w
}

/// Piecewise-cubic Stieltjes quadrature of grid functions against a measure.
///
/// Density parts are integrated per cell by product integration of the
/// four-point Lagrange interpolant of `g` (exact for cubic `g`) that never
/// reaches across a segment boundary; atoms are summed exactly.
#[derive(Clone, Debug)]
pub struct Quadrature {
    grid: Arc<Grid>,
    cells: Vec<CellRule>,
    atoms: Vec<(usize, f64)>,
}

impl Quadrature {
    pub fn new(grid: Arc<Grid>, measure: &SpinMeasure) -> Result<Self> {
        for b in measure.breakpoints() {
            match grid.index_of(b) {
                Some(i) if grid.is_boundary(i) => {}
                _ => return Err(Error::MissingBreakpoint(b)),
            }
        }
        let atoms = measure
            .atoms()
            .iter()
            .map(|a| {
                grid.index_of(a.location)
                    .map(|i| (i, a.weight))
                    .ok_or(Error::MissingBreakpoint(a.location))
            })
            .collect::<Result<Vec<_>>>()?;

        let z = grid.points();
        let mut cells = Vec::with_capacity(grid.len().saturating_sub(1));
        for (s, e) in grid.segments() {
            let mid = 0.5 * (z[s] + z[e]);
            let piece = measure
                .pieces()
                .iter()
                .find(|p| p.start <= mid && mid <= p.end)
                .copied();
            let m = e - s;
            for j in s..e {
                let Some(piece) = piece else {
                    cells.push(CellRule { first: j, len: 0, weights: [0.0; 4] });
                    continue;
                };
                let (first, len) = match m {
                    1 => (s, 2),
                    2 => (s, 3),
                    _ => (j.saturating_sub(1).clamp(s, e - 3), 4),
                };
                let nodes = &z[first..first + len];
                let weights = lagrange_cell_weights(nodes, z[j], z[j + 1], |x| piece.eval(x));
                cells.push(CellRule { first, len, weights });
            }
        }
        Ok(Self { grid, cells, atoms })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    #[inline]
    fn cell(&self, j: usize, g: &[f64]) -> f64 {
        let c = &self.cells[j];
        (0..c.len).map(|k| c.weights[k] * g[c.first + k]).sum()
    }

    /// `A[i] = ∫_{[0, z_i]} g dμ`, closed at both ends.
    pub fn cumulative(&self, g: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let mut atom_at = vec![0.0; n];
        for &(i, w) in &self.atoms {
            atom_at[i] += w * g[i];
        }
        let mut out = Vec::with_capacity(n);
        let mut acc = atom_at[0];
        out.push(acc);
        for j in 0..n - 1 {
            acc += self.cell(j, g) + atom_at[j + 1];
            out.push(acc);
        }
        out
    }

    /// `∫_{[z_a, z_b]} g dμ` between grid indices, closed at both ends.
    pub fn integral_between(&self, g: &[f64], a: usize, b: usize) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|(i, _)| (a..=b).contains(i))
            .map(|&(i, w)| w * g[i])
            .sum();
        let density: f64 = (a..b).map(|j| self.cell(j, g)).sum();
        atoms + density
    }

    pub fn integral(&self, g: &[f64]) -> f64 {
        self.integral_between(g, 0, self.grid.len() - 1)
    }
}

/// `∫_{[a, b]} g dμ` for a grid-sampled `g`.
///
/// Fails when `a`, `b` or a breakpoint of `measure` is not a grid point.
pub fn stieltjes_integrate(
    measure: &SpinMeasure,
    grid: &Arc<Grid>,
    g: &[f64],
    a: f64,
    b: f64,
) -> Result<f64> {
    if !(0.0 <= a && a <= b && b <= 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 <= a <= b <= 1, got [{a}, {b}]")));
    }
    let ia = grid.index_of(a).ok_or(Error::MissingBreakpoint(a))?;
    let ib = grid.index_of(b).ok_or(Error::MissingBreakpoint(b))?;
    Ok(Quadrature::new(Arc::clone(grid), measure)?.integral_between(g, ia, ib))
}

/// A distribution function on `[0, 1]` sampled on a [`Grid`].
///
/// Values are right-continuous: at an atom location the stored value
/// already includes the jump.
#[derive(Clone, Debug)]
pub struct GridDistribution {
    grid: Arc<Grid>,
    values: Vec<f64>,
    jumps: Vec<(f64, f64)>,
    derivative: Option<Vec<f64>>,
}

impl GridDistribution {
    pub fn new(
        grid: Arc<Grid>,
        values: Vec<f64>,
        jumps: Vec<(f64, f64)>,
        derivative: Option<Vec<f64>>,
    ) -> Result<Self> {
        if values.len() != grid.len() || derivative.as_ref().map_or(false, |d| d.len() != grid.len()) {
            return Err(Error::InvalidParameter("value count does not match grid".into()));
        }
        Ok(Self { grid, values, jumps, derivative })
    }

    /// A point mass at `location` (which must be a grid point).
    pub fn point_mass(grid: Arc<Grid>, location: f64) -> Result<Self> {
        let i = grid.index_of(location).ok_or(Error::MissingBreakpoint(location))?;
        let values = (0..grid.len()).map(|j| if j >= i { 1.0 } else { 0.0 }).collect();
        Ok(Self { grid, values, jumps: vec![(location, 1.0)], derivative: None })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn derivative(&self) -> Option<&[f64]> {
        self.derivative.as_deref()
    }

    /// Value at `x` by linear interpolation between grid points.
    pub fn eval(&self, x: f64) -> f64 {
        self.grid.interpolate(&self.values, x)
    }

    pub fn total_jump(&self) -> f64 {
        self.jumps.iter().map(|j| j.1).sum()
    }

    /// Largest absolute difference of values; grids must match.
    pub fn sup_distance(&self, other: &GridDistribution) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Trapezoid integral of the derivative over each smooth segment plus
    /// the jump mass; `1` up to grid error for a normalized distribution.
    pub fn derivative_mass(&self) -> Option<f64> {
        let f = self.derivative.as_ref()?;
        let z = self.grid.points();
        let density: f64 = (0..z.len() - 1)
            .map(|j| 0.5 * (f[j] + f[j + 1]) * (z[j + 1] - z[j]))
            .sum();
        Some(density + self.total_jump())
    }

    /// CSV with header `z,F,f`; a jump at `z` is written as two rows with the
    /// left and right limits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,F,f\n");
        let z = self.grid.points();
        for (i, &zi) in z.iter().enumerate() {
            let f = self
                .derivative
                .as_ref()
                .map_or(String::new(), |d| fmt17(d[i]));
            if let Some(&(_, size)) = self.jumps.iter().find(|j| (j.0 - zi).abs() <= LOCATE_TOL) {
                if size > 0.0 {
                    let left = (self.values[i] - size).max(0.0);
                    let _ = writeln!(out, "{},{},{}", fmt17(zi), fmt17(left), f);
                }
            }
            let _ = writeln!(out, "{},{},{}", fmt17(zi), fmt17(self.values[i]), f);
        }
        out
    }
}

/// 17 significant digits, scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(k: usize, b: &[f64]) -> Arc<Grid> {
        Arc::new(Grid::with_breakpoints(k, b).unwrap())
    }

    #[test]
    fn grid_is_symmetric_and_contains_breakpoints() {
        let g = Grid::with_breakpoints(64, &[0.1, 1.0 / 3.0]).unwrap();
        let z = g.points();
        assert_eq!(z[0], 0.0);
        assert_eq!(*z.last().unwrap(), 1.0);
        for i in 0..z.len() {
            assert!((z[i] + z[g.reflect(i)] - 1.0).abs() < 1e-15);
        }
        assert!(z.windows(2).all(|w| w[0] < w[1]));
        for b in [0.1, 0.9, 1.0 / 3.0, 2.0 / 3.0] {
            let i = g.index_of(b).expect("breakpoint on grid");
            assert!(g.is_boundary(i));
        }
    }

    #[test]
    fn constant_integrand_gives_total_mass() {
        for m in [
            SpinMeasure::continuous(2.5).unwrap(),
            SpinMeasure::two_state(2.0).unwrap(),
            SpinMeasure::multi_state(4, 0.7).unwrap(),
            SpinMeasure::eps_interpolated(0.1, 3.0).unwrap(),
        ] {
            let g = grid(256, &m.breakpoints());
            let ones = vec![1.0; g.len()];
            let got = stieltjes_integrate(&m, &g, &ones, 0.0, 1.0).unwrap();
            assert_relative_eq!(got, m.total_mass(), max_relative = 1e-12);
        }
    }

    #[test]
    fn linear_integrand_uniform() {
        let m = SpinMeasure::continuous(1.0).unwrap();
        let g = grid(16, &[]);
        let vals: Vec<f64> = g.points().iter().map(|z| 1.0 - z).collect();
        let got = stieltjes_integrate(&m, &g, &vals, 0.0, 1.0).unwrap();
        assert_relative_eq!(got, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn two_state_reflected_distribution() {
        // g(x) = F(1 - x) for a step F with F(0) = p: gives 1 + lambda * p
        let lambda = 2.0;
        let p = 0.3;
        let m = SpinMeasure::two_state(lambda).unwrap();
        let g = grid(8, &[]);
        let f: Vec<f64> = g.points().iter().map(|&z| if z < 1.0 { p } else { 1.0 }).collect();
        let refl: Vec<f64> = (0..g.len()).map(|i| f[g.reflect(i)]).collect();
        let got = stieltjes_integrate(&m, &g, &refl, 0.0, 1.0).unwrap();
        assert_relative_eq!(got, 1.0 + lambda * p, epsilon = 1e-15);
    }

    #[test]
    fn missing_breakpoint_is_rejected() {
        let m = SpinMeasure::eps_interpolated(0.1, 1.0).unwrap();
        let g = grid(16, &[]);
        let ones = vec![1.0; g.len()];
        assert!(matches!(
            stieltjes_integrate(&m, &g, &ones, 0.0, 1.0),
            Err(Error::MissingBreakpoint(_))
        ));
        assert!(stieltjes_integrate(&m, &grid(16, &[0.1]), &ones, 0.0, 0.3).is_err());
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let lambda = std::f64::consts::E;
        let m = SpinMeasure::continuous(lambda).unwrap();
        let g = grid(512, &[]);
        let q = Quadrature::new(Arc::clone(&g), &m).unwrap();
        let cum = q.cumulative(&vec![1.0; g.len()]);
        for (i, &z) in g.points().iter().enumerate() {
            assert_relative_eq!(cum[i], z.exp() - 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn csv_marks_jumps_with_duplicate_rows() {
        let g = grid(4, &[]);
        let d = GridDistribution::new(
            Arc::clone(&g),
            vec![0.25, 0.25, 0.25, 0.25, 1.0],
            vec![(0.0, 0.25), (1.0, 0.75)],
            None,
        )
        .unwrap();
        let csv = d.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "z,F,f");
        assert_eq!(lines.len(), 1 + 5 + 2);
        assert!(lines[1].starts_with("0.0000000000000000e0,0.0000000000000000e0"));
        assert!(lines[2].starts_with("0.0000000000000000e0,2.5000000000000000e-1"));
    }

    proptest::proptest! {
        #[test]
        fn cubic_exactness(c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, c3 in -2.0f64..2.0,
                           k in 1usize..20, a in 0.0f64..0.45, b in 0.0f64..0.45) {
            let g = grid(2 * k + 2, &[a.max(1e-3), b.max(1e-3)]);
            let m = SpinMeasure::continuous(1.0).unwrap();
            let vals: Vec<f64> = g.points().iter().map(|&x| c0 + c1 * x + c2 * x * x + c3 * x * x * x).collect();
            let q = Quadrature::new(Arc::clone(&g), &m).unwrap();
            let exact = c0 + c1 / 2.0 + c2 / 3.0 + c3 / 4.0;
            // four-point cells are exact for cubics on any spacing
            if g.segments().all(|(s, e)| e - s >= 3) {
                let got = q.integral(&vals);
                proptest::prop_assert!((got - exact).abs() < 1e-13, "got {} exact {}", got, exact);
            }
        }
    }
}
