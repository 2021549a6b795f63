//! Globally adaptive 21-point Gauss–Kronrod quadrature for vector-valued
//! integrands.
//!
//! Every component shares one subdivision, so a table of related
//! integrals (all `G_m` at one model point) costs a single adaptive pass.
//! The rule is open: endpoints are never evaluated, which keeps removable
//! singularities at interval ends harmless.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_158_548_994,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], …, XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Absolute tolerance on every component.
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-10,
            max_subdivisions: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub values: Vec<f64>,
    /// Summed per-interval error estimate, per component.
    pub errors: Vec<f64>,
    pub subdivisions: usize,
}

impl QuadResult {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

struct Piece {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    worst: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.worst == other.worst
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Ties broken by position so the subdivision order is deterministic.
        self.worst
            .total_cmp(&other.worst)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Piece
where
    F: FnMut(f64, &mut [f64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    f(c, buf);
    for i in 0..dim {
        kron[i] = WGK[10] * buf[i];
    }
    for (j, &x) in XGK[..10].iter().enumerate() {
        for t in [c - h * x, c + h * x] {
            f(t, buf);
            for i in 0..dim {
                kron[i] += WGK[j] * buf[i];
                if j % 2 == 1 {
                    gauss[i] += WG[j / 2] * buf[i];
                }
            }
        }
    }
    let mut worst = 0.0f64;
    let errors: Vec<f64> = (0..dim)
        .map(|i| {
            let e = (h * (kron[i] - gauss[i])).abs();
            worst = worst.max(e);
            e
        })
        .collect();
    for v in &mut kron {
        *v *= h;
    }
    Piece {
        a,
        b,
        values: kron,
        errors,
        worst,
    }
}

/// Integrates `f` over consecutive intervals given by `breakpoints`
/// (sorted, at least two entries). `f(x, out)` writes `dim` values.
pub fn integrate<F>(mut f: F, dim: usize, breakpoints: &[f64], opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64, &mut [f64]),
{
    assert!(breakpoints.len() >= 2, "need at least one interval");
    let mut buf = vec![0.0; dim];
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            heap.push(gk21(&mut f, w[0], w[1], dim, &mut buf));
        }
    }
    let mut subdivisions = heap.len();

    loop {
        let mut total_err = vec![0.0; dim];
        for p in heap.iter() {
            for i in 0..dim {
                total_err[i] += p.errors[i];
            }
        }
        let worst_total = total_err.iter().copied().fold(0.0, f64::max);
        if worst_total <= opts.abs_tol {
            break;
        }
        let top = heap.peek().expect("nonempty");
        let mid = 0.5 * (top.a + top.b);
        if subdivisions >= opts.max_subdivisions || mid <= top.a || mid >= top.b {
            return Err(Error::Quadrature {
                estimated_error: worst_total,
                tolerance: opts.abs_tol,
            });
        }
        let top = heap.pop().expect("nonempty");
        heap.push(gk21(&mut f, top.a, mid, dim, &mut buf));
        heap.push(gk21(&mut f, mid, top.b, dim, &mut buf));
        subdivisions += 1;
    }

    // Sum in interval order, not heap order, for reproducible rounding.
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for p in &pieces {
        for i in 0..dim {
            values[i] += p.values[i];
            errors[i] += p.errors[i];
        }
    }
    Ok(QuadResult {
        values,
        errors,
        subdivisions,
    })
}

/// Scalar convenience wrapper.
pub fn integrate_scalar<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate(|x, out| out[0] = f(x), 1, &[a, b], opts)?;
    Ok((r.values[0], r.errors[0]))
}
