//! First-arrival traveltimes of the perturbation front, `|∇t_P| = 1/v_P`.
//!
//! First-order fast marching: cells are finalized in increasing traveltime
//! from a binary min-heap (ties go to the lowest flat index) and each
//! tentative value comes from the Godunov upwind quadratic built on already
//! finalized neighbors.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{invalid, Error, Result};
use crate::field::{Mask, ScalarField};
use crate::grid::Grid;

/// Cells where the perturbation is introduced at `t = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpec {
    cells: Vec<Vec<usize>>,
}

impl SourceSpec {
    pub fn new(cells: Vec<Vec<usize>>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptySource);
        }
        Ok(Self { cells })
    }

    pub fn point(cell: Vec<usize>) -> Self {
        Self { cells: vec![cell] }
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }
}

/// Propagation speed `v_P`, m/s.
#[derive(Debug, Clone, PartialEq)]
pub enum Speed {
    Uniform(f64),
    Map(ScalarField),
}

impl Speed {
    fn at(&self, flat: usize) -> f64 {
        match self {
            Speed::Uniform(v) => *v,
            Speed::Map(f) => f.values()[flat],
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            Speed::Uniform(v) => *v,
            Speed::Map(f) => f.max(),
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        match self {
            Speed::Uniform(v) if !ok(*v) => {
                Err(invalid("speed", format!("{v} must be positive and finite")))
            }
            Speed::Map(f) if f.grid() != grid => Err(Error::GridMismatch("speed map and grid")),
            Speed::Map(f) => match f.values().iter().position(|&v| !ok(v)) {
                Some(i) => Err(invalid(
                    "speed",
                    format!(
                        "{} at cell {:?} must be positive and finite",
                        f.values()[i],
                        grid.unflatten(i)
                    ),
                )),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraveltimeField {
    field: ScalarField,
    speed: Speed,
}

impl TraveltimeField {
    /// Wraps precomputed traveltimes (seconds); all values must be finite and non-negative.
    pub fn from_field(field: ScalarField, speed: Speed) -> Result<Self> {
        if let Some(i) = field
            .values()
            .iter()
            .position(|&t| !(t >= 0.0 && t.is_finite()))
        {
            return Err(invalid(
                "traveltime",
                format!(
                    "value {} at flat index {i} must be finite and >= 0",
                    field.values()[i]
                ),
            ));
        }
        speed.validate(field.grid())?;
        Ok(Self { field, speed })
    }

    /// Traveltimes read back from disk, where the speed that produced them
    /// is unknown. The default front tolerance of such a field is 0.
    pub fn from_times(field: ScalarField) -> Result<Self> {
        let tt = Self::from_field(field, Speed::Uniform(1.0))?;
        Ok(Self {
            speed: Speed::Uniform(f64::INFINITY),
            ..tt
        })
    }

    /// `t_P ≡ 0`: the infinite-speed limit.
    pub fn zero(grid: Grid) -> Self {
        Self {
            field: ScalarField::filled(grid, 0.0),
            speed: Speed::Uniform(f64::INFINITY),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn speed(&self) -> &Speed {
        &self.speed
    }

    pub fn max(&self) -> f64 {
        self.field.max()
    }

    /// Returns a copy with every traveltime multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let speed = match &self.speed {
            Speed::Uniform(v) => Speed::Uniform(v / factor),
            Speed::Map(f) => Speed::Map(f.map(|v| v / factor)),
        };
        Self::from_field(self.field.map(|t| t * factor), speed)
    }

    /// Half the time the fastest front needs to cross the narrowest cell.
    pub fn default_front_tolerance(&self) -> f64 {
        self.grid().min_spacing() / (2.0 * self.speed.max())
    }
}

/// `{x : t_P(x) ≤ t}`; its boundary is the front `S_P` at time `t`.
pub fn front_mask(tt: &TraveltimeField, t: f64) -> Mask {
    let values = tt.values().iter().map(|&tp| tp <= t).collect();
    Mask::new(tt.grid().clone(), values).expect("mask built from field of the same grid")
}

/// Size of the neighborhood around each source that is finalized with
/// straight-ray times `|x − x_s| / v(x_s)` before marching starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceRadius {
    /// In multiples of the grid's smallest spacing.
    Cells(f64),
    Meters(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Also try the two 45° diagonal directions on 2-D grids and keep the
    /// smaller arrival.
    pub diagonal_stencils: bool,
    pub source_radius: SourceRadius,
}

impl SolverOptions {
    pub const DEFAULT_SOURCE_RADIUS_CELLS: f64 = 5.0;

    /// Axis-aligned stencil only, and only the source cells themselves seeded.
    pub fn plain() -> Self {
        Self {
            diagonal_stencils: false,
            source_radius: SourceRadius::Cells(0.0),
        }
    }

    fn radius_meters(&self, grid: &Grid) -> f64 {
        match self.source_radius {
            SourceRadius::Cells(n) => n * grid.min_spacing(),
            SourceRadius::Meters(r) => r,
        }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            diagonal_stencils: true,
            source_radius: SourceRadius::Cells(Self::DEFAULT_SOURCE_RADIUS_CELLS),
        }
    }
}

pub fn solve_traveltime(grid: &Grid, source: &SourceSpec, speed: Speed) -> Result<TraveltimeField> {
    solve_traveltime_with(grid, source, speed, SolverOptions::default()).map(|(tt, _)| tt)
}

/// Solves with explicit options, also returning the flat indices in the
/// order the solver finalized them.
pub fn solve_traveltime_with(
    grid: &Grid,
    source: &SourceSpec,
    speed: Speed,
    options: SolverOptions,
) -> Result<(TraveltimeField, Vec<usize>)> {
    speed.validate(grid)?;
    let radius = options.radius_meters(grid);
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(invalid(
            "source_radius",
            format!("{radius} must be finite and >= 0"),
        ));
    }
    let mut flats = Vec::with_capacity(source.cells().len());
    for cell in source.cells() {
        flats.push(
            grid.flat_index(cell)
                .ok_or_else(|| Error::SourceOutOfBounds(cell.clone()))?,
        );
    }
    let mut marcher = Marcher::new(grid, &speed, options.diagonal_stencils && grid.dims() == 2);
    for &flat in &flats {
        marcher.seed_ball(flat, radius);
    }
    marcher.run();
    let order = marcher.order;
    let field = ScalarField::new(grid.clone(), marcher.times)?;
    Ok((TraveltimeField { field, speed }, order))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Far,
    Trial,
    Known,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    time: f64,
    flat: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.flat.cmp(&other.flat))
    }
}

struct Marcher<'a> {
    grid: &'a Grid,
    speed: &'a Speed,
    strides: Vec<usize>,
    inv_h2: Vec<f64>,
    diagonal: bool,
    times: Vec<f64>,
    state: Vec<State>,
    /// Seeded with an exact time; never updated by the stencils.
    fixed: Vec<bool>,
    heap: BinaryHeap<Reverse<Candidate>>,
    order: Vec<usize>,
}

impl<'a> Marcher<'a> {
    fn new(grid: &'a Grid, speed: &'a Speed, diagonal: bool) -> Self {
        let n = grid.len();
        Self {
            grid,
            speed,
            strides: grid.strides(),
            inv_h2: grid.spacing().iter().map(|h| 1.0 / (h * h)).collect(),
            diagonal,
            times: vec![f64::INFINITY; n],
            state: vec![State::Far; n],
            fixed: vec![false; n],
            heap: BinaryHeap::new(),
            order: Vec::with_capacity(n),
        }
    }

    /// Seeds every cell within `radius` meters of the source at `flat` with
    /// its straight-ray time at the source speed; the source itself gets 0.
    fn seed_ball(&mut self, flat: usize, radius: f64) {
        let centre = self.grid.unflatten(flat);
        let spacing = self.grid.spacing();
        let lo: Vec<usize> = centre
            .iter()
            .zip(spacing)
            .map(|(&c, h)| c.saturating_sub((radius / h).floor() as usize))
            .collect();
        let hi: Vec<usize> = centre
            .iter()
            .zip(spacing)
            .zip(self.grid.shape())
            .map(|((&c, h), &n)| (c + (radius / h).floor() as usize).min(n - 1))
            .collect();
        let slowness = 1.0 / self.speed.at(flat);
        let mut index = lo.clone();
        loop {
            let d2: f64 = index
                .iter()
                .zip(&centre)
                .zip(spacing)
                .map(|((&i, &c), h)| ((i as f64 - c as f64) * h).powi(2))
                .sum();
            let d = d2.sqrt();
            if d <= radius {
                let cell = self.grid.flat_index(&index).expect("inside bounding box");
                let t = d * slowness;
                if t < self.times[cell] {
                    self.times[cell] = t;
                    self.state[cell] = State::Trial;
                    self.fixed[cell] = true;
                    self.heap.push(Reverse(Candidate {
                        time: t,
                        flat: cell,
                    }));
                }
            }
            // odometer over the bounding box
            let mut axis = index.len();
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                if index[axis] < hi[axis] {
                    index[axis] += 1;
                    break;
                }
                index[axis] = lo[axis];
            }
        }
    }

    fn run(&mut self) {
        let mut neighbors = Vec::with_capacity(8);
        while let Some(Reverse(Candidate { time, flat })) = self.heap.pop() {
            if self.state[flat] == State::Known || time > self.times[flat] {
                continue;
            }
            self.state[flat] = State::Known;
            self.order.push(flat);
            neighbors.clear();
            self.neighbors(flat, &mut neighbors);
            for &nb in &neighbors {
                if self.state[nb] == State::Known || self.fixed[nb] {
                    continue;
                }
                let mut t = self.axis_update(nb);
                if self.diagonal {
                    t = t.min(self.diagonal_update(nb));
                }
                if t < self.times[nb] {
                    self.times[nb] = t;
                    self.state[nb] = State::Trial;
                    self.heap.push(Reverse(Candidate { time: t, flat: nb }));
                }
            }
        }
    }

    fn neighbors(&self, flat: usize, out: &mut Vec<usize>) {
        let index = self.grid.unflatten(flat);
        let shape = self.grid.shape();
        for (axis, (&i, &n)) in index.iter().zip(shape).enumerate() {
            let stride = self.strides[axis];
            if i > 0 {
                out.push(flat - stride);
            }
            if i + 1 < n {
                out.push(flat + stride);
            }
        }
        if self.diagonal {
            for (di, dj) in [(-1, -1), (-1, 1), (1, -1), (1, 1)] {
                if let Some(nb) = self.offset(&index, di, dj) {
                    out.push(nb);
                }
            }
        }
    }

    /// Flat index of `(i + di, j + dj)` on a 2-D grid, if inside.
    fn offset(&self, index: &[usize], di: isize, dj: isize) -> Option<usize> {
        let i = index[0].checked_add_signed(di)?;
        let j = index[1].checked_add_signed(dj)?;
        self.grid.flat_index(&[i, j])
    }

    fn known_time(&self, flat: Option<usize>) -> Option<f64> {
        flat.filter(|&f| self.state[f] == State::Known)
            .map(|f| self.times[f])
    }

    /// Smallest finalized neighbor value along `axis`, if any.
    fn upwind(&self, flat: usize, axis: usize, i: usize) -> Option<f64> {
        let stride = self.strides[axis];
        let n = self.grid.shape()[axis];
        let below = (i > 0).then(|| flat - stride);
        let above = (i + 1 < n).then(|| flat + stride);
        match (self.known_time(below), self.known_time(above)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Godunov update: the largest root of `Σ ((t − a_d)/h_d)² = 1/v²` over the
    /// smallest prefix of sorted upwind values `a_d` for which `t` stays above
    /// every `a_d` it uses.
    fn axis_update(&self, flat: usize) -> f64 {
        let index = self.grid.unflatten(flat);
        let mut upwind: Vec<(f64, f64)> = index
            .iter()
            .enumerate()
            .filter_map(|(axis, &i)| self.upwind(flat, axis, i).map(|a| (a, self.inv_h2[axis])))
            .collect();
        upwind.sort_by(|x, y| x.0.total_cmp(&y.0));
        let slowness = 1.0 / self.speed.at(flat);
        let rhs = slowness * slowness;

        let (mut sa, mut sb, mut sc) = (0.0, 0.0, 0.0);
        let mut t = f64::INFINITY;
        for (m, &(a, w)) in upwind.iter().enumerate() {
            sa += w;
            sb += a * w;
            sc += a * a * w;
            // sa t² − 2 sb t + sc − rhs = 0
            let disc = sb * sb - sa * (sc - rhs);
            if disc < 0.0 {
                break;
            }
            let root = (sb + disc.sqrt()) / sa;
            t = root.max(a);
            match upwind.get(m + 1) {
                Some(&(next, _)) if root > next => continue,
                _ => break,
            }
        }
        t
    }

    /// Same update on the stencil rotated onto the grid diagonals. For
    /// unequal spacings the two diagonals are not orthogonal, so the
    /// quadratic carries their cosine `c`:
    /// `d₁² − 2c d₁d₂ + d₂² = (1 − c²)/v²`, `d_i = (t − a_i)/L`.
    fn diagonal_update(&self, flat: usize) -> f64 {
        let index = self.grid.unflatten(flat);
        let (h0, h1) = (self.grid.spacing()[0], self.grid.spacing()[1]);
        let len = h0.hypot(h1);
        let slowness = 1.0 / self.speed.at(flat);
        // Each diagonal: the smaller finalized end, with the unit vector
        // pointing from it towards this cell.
        let pick = |ends: [((isize, isize), (f64, f64)); 2]| -> Option<(f64, (f64, f64))> {
            ends.iter()
                .filter_map(|&((di, dj), w)| {
                    self.known_time(self.offset(&index, di, dj)).map(|a| (a, w))
                })
                .min_by(|x, y| x.0.total_cmp(&y.0))
        };
        let (u0, u1) = (h0 / len, h1 / len);
        let first = pick([((-1, -1), (u0, u1)), ((1, 1), (-u0, -u1))]);
        let second = pick([((-1, 1), (u0, -u1)), ((1, -1), (-u0, u1))]);
        let single = |a: f64| a + len * slowness;
        match (first, second) {
            (None, None) => f64::INFINITY,
            (Some((a, _)), None) | (None, Some((a, _))) => single(a),
            (Some((a1, w1)), Some((a2, w2))) => {
                let fallback = single(a1.min(a2));
                let c = w1.0 * w2.0 + w1.1 * w2.1;
                let qa = 2.0 * (1.0 - c);
                let qb = (1.0 - c) * (a1 + a2);
                let qc = a1 * a1 + a2 * a2
                    - 2.0 * c * a1 * a2
                    - len * len * slowness * slowness * (1.0 - c * c);
                let disc = qb * qb - qa * qc;
                if disc < 0.0 {
                    return fallback;
                }
                let t = (qb + disc.sqrt()) / qa;
                let (d1, d2) = ((t - a1) / len, (t - a2) / len);
                // the characteristic must arrive from between the two ends
                if t >= a1.max(a2) && d1 - c * d2 >= 0.0 && d2 - c * d1 >= 0.0 {
                    t.min(fallback)
                } else {
                    fallback
                }
            }
        }
    }
}
