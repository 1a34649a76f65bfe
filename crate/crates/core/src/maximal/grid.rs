use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, RectId};

/// Nodes `origin + (i, j)·pitch` for `i < nx`, `j < ny`, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub origin: Point,
    pub pitch: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridLayout {
    pub fn new(origin: Point, pitch: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(pitch > 0.0) || !pitch.is_finite() {
            return Err(Error::InvalidParam(format!("grid pitch must be positive, got {pitch}")));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParam("grid dimensions must be nonzero".into()));
        }
        Ok(GridLayout { origin, pitch, nx, ny })
    }

    /// Square `n × n` grid centered at `center`.
    pub fn centered(center: Point, pitch: f64, n: usize) -> Result<Self> {
        let half = 0.5 * (n as f64 - 1.0) * pitch;
        Self::new(Point::new(center.x - half, center.y - half), pitch, n, n)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Point {
        Point::new(self.origin.x + i as f64 * self.pitch, self.origin.y + j as f64 * self.pitch)
    }

    #[inline]
    pub fn point_at(&self, k: usize) -> Point {
        self.point(k % self.nx, k / self.nx)
    }

    pub fn cell_area(&self) -> f64 {
        self.pitch * self.pitch
    }

    pub fn max(&self) -> Point {
        self.point(self.nx - 1, self.ny - 1)
    }
}

/// A nonnegative function given by its values at grid nodes, extended by
/// bilinear interpolation and by zero outside the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    layout: GridLayout,
    values: Vec<f64>,
    /// `(nx+1) × (ny+1)` table; entry `(i, j)` sums nodes `[0,i) × [0,j)`.
    prefix: Vec<f64>,
    support: Option<(Point, Point)>,
}

impl ScalarField {
    pub fn new(layout: GridLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::InvalidParam(format!(
                "expected {} values for a {}x{} grid, got {}",
                layout.len(),
                layout.nx,
                layout.ny,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParam(format!("field values must be finite and nonnegative, found {v}")));
        }
        let (nx, ny) = (layout.nx, layout.ny);
        let mut prefix = vec![0.0; (nx + 1) * (ny + 1)];
        for j in 0..ny {
            let mut row = 0.0;
            for i in 0..nx {
                row += values[j * nx + i];
                prefix[(j + 1) * (nx + 1) + i + 1] = prefix[j * (nx + 1) + i + 1] + row;
            }
        }
        let support = bounds_of_nonzero(&layout, &values);
        Ok(ScalarField { layout, values, prefix, support })
    }

    pub fn from_fn(layout: GridLayout, mut f: impl FnMut(Point) -> f64) -> Result<Self> {
        let values = (0..layout.len()).map(|k| f(layout.point_at(k))).collect();
        Self::new(layout, values)
    }

    pub fn zeros(layout: GridLayout) -> Self {
        Self::new(layout, vec![0.0; layout.len()]).expect("zero field is valid")
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> f64 {
        if i < 0 || j < 0 || i as usize >= self.layout.nx || j as usize >= self.layout.ny {
            0.0
        } else {
            self.values[j as usize * self.layout.nx + i as usize]
        }
    }

    /// Bilinear interpolation of the zero-extended node values.
    #[inline]
    pub fn sample(&self, p: Point) -> f64 {
        let fx = (p.x - self.layout.origin.x) / self.layout.pitch;
        let fy = (p.y - self.layout.origin.y) / self.layout.pitch;
        if !(fx > -1.0 && fy > -1.0 && fx < self.layout.nx as f64 && fy < self.layout.ny as f64) {
            return 0.0;
        }
        let (x0, y0) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - x0, fy - y0);
        let (i, j) = (x0 as isize, y0 as isize);
        let bottom = lerp(self.get(i, j), self.get(i + 1, j), tx);
        let top = lerp(self.get(i, j + 1), self.get(i + 1, j + 1), tx);
        lerp(bottom, top, ty)
    }

    /// Sum of node values over the index box `[i0, i1) × [j0, j1)`, clamped to the grid.
    pub fn box_sum(&self, i0: isize, i1: isize, j0: isize, j1: isize) -> f64 {
        let cx = |i: isize| i.clamp(0, self.layout.nx as isize) as usize;
        let cy = |j: isize| j.clamp(0, self.layout.ny as isize) as usize;
        let (a0, a1, b0, b1) = (cx(i0), cx(i1), cy(j0), cy(j1));
        if a1 <= a0 || b1 <= b0 {
            return 0.0;
        }
        let w = self.layout.nx + 1;
        let s = self.prefix[b1 * w + a1] - self.prefix[b0 * w + a1] - self.prefix[b1 * w + a0] + self.prefix[b0 * w + a0];
        s.max(0.0)
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.layout.cell_area()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.layout.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Area of the support, counted as nonzero nodes times the cell area.
    pub fn support_area(&self) -> f64 {
        self.values.iter().filter(|&&v| v > 0.0).count() as f64 * self.layout.cell_area()
    }

    pub fn scaled(&self, c: f64) -> Result<ScalarField> {
        ScalarField::new(self.layout, self.values.iter().map(|v| c * v).collect())
    }

    /// Bounding box of the nonzero nodes, if any.
    pub fn support_bounds(&self) -> Option<(Point, Point)> {
        self.support
    }

    /// Whether `sample` vanishes on the whole closed box: true when the box
    /// stays at least one pitch away from every nonzero node.
    pub fn vanishes_on(&self, lo: Point, hi: Point) -> bool {
        match self.support {
            None => true,
            Some((a, b)) => {
                let h = self.layout.pitch;
                hi.x <= a.x - h || lo.x >= b.x + h || hi.y <= a.y - h || lo.y >= b.y + h
            }
        }
    }
}

fn bounds_of_nonzero(layout: &GridLayout, values: &[f64]) -> Option<(Point, Point)> {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (k, &v) in values.iter().enumerate() {
        if v > 0.0 {
            let p = layout.point_at(k);
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    lo.x.is_finite().then_some((lo, hi))
}

/// `a + t·(b - a)`, exact when `a == b`.
#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// Operator output on a grid, with the witnessing rectangle per node when the
/// operator is a supremum over a rectangle family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxField {
    pub layout: GridLayout,
    pub values: Vec<f64>,
    pub witness: Vec<Option<RectId>>,
}

impl MaxField {
    pub fn zeros(layout: GridLayout) -> Self {
        MaxField { layout, values: vec![0.0; layout.len()], witness: vec![None; layout.len()] }
    }

    /// Measure of `{x : value(x) > λ}`, as node count times the cell area.
    pub fn superlevel_measure(&self, lambda: f64) -> f64 {
        self.values.iter().filter(|&&v| v > lambda).count() as f64 * self.layout.cell_area()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}
