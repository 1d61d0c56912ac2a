//! Symmetry and symmetry-breaking regions in the `(a, b)` plane.

use crate::error::{Error, Result};
use crate::optim::brent_root;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    NotAchieved,
    SymmetryBreaking,
    Symmetric,
    OpenConjectured,
    OutsideScope,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NotAchieved => "not_achieved",
            Verdict::SymmetryBreaking => "symmetry_breaking",
            Verdict::Symmetric => "symmetric",
            Verdict::OpenConjectured => "open_conjectured",
            Verdict::OutsideScope => "outside_scope",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionVerdict {
    pub verdict: Verdict,
    /// The criterion that decided; empty for `OutsideScope`.
    pub provenance: &'static str,
    /// `RHS − LHS` of the conjectured symmetry inequality, for open points.
    pub conjectured_margin: Option<f64>,
}

impl RegionVerdict {
    fn new(verdict: Verdict, provenance: &'static str) -> Self {
        RegionVerdict { verdict, provenance, conjectured_margin: None }
    }
}

fn a_crit(n: f64, p: f64) -> f64 {
    (n - p) / p
}

/// Felli–Schneider curve for `p = 2`, defined for `a < 0`.
pub fn b_fs(n: u32, a: f64) -> Result<f64> {
    if !(a < 0.0) {
        return Err(Error::Domain(format!("b_FS is defined for a < 0, got {a}")));
    }
    let nf = n as f64;
    let d = a_crit(nf, 2.0) - a;
    Ok(nf * d / (2.0 * (d * d + nf - 1.0).sqrt()) - d)
}

/// `(1+a−b)(a_c−a)/(a_c−a+b)`, shared by the three general-`p` criteria.
fn cm_lhs(n: f64, p: f64, a: f64, b: f64) -> f64 {
    let ac = a_crit(n, p);
    (1.0 + a - b) * (ac - a) / (ac - a + b)
}

/// `√((N−k)/(N/(1+a−b)−k))`; `None` where undefined.
fn sqrt_bound(n: f64, k: f64, a: f64, b: f64) -> Option<f64> {
    let den = n / (1.0 + a - b) - k;
    let v = (n - k) / den;
    (den > 0.0 && v >= 0.0).then(|| v.sqrt())
}

/// `LHS − √((N−1)/(N/θ−1))`: positive is the Caldiroli–Musina breaking side,
/// nonpositive the conjectured symmetry side.
pub fn cm_gap(n: u32, p: f64, a: f64, b: f64) -> Option<f64> {
    let nf = n as f64;
    sqrt_bound(nf, 1.0, a, b).map(|rhs| cm_lhs(nf, p, a, b) - rhs)
}

/// `LHS − √((N−2)/(N/θ−2))`: nonpositive is the Ciraolo–Corso inequality.
pub fn cc_gap(n: u32, p: f64, a: f64, b: f64) -> Option<f64> {
    let nf = n as f64;
    sqrt_bound(nf, 2.0, a, b).map(|rhs| cm_lhs(nf, p, a, b) - rhs)
}

/// `b` on the curve `gap(b) = 0` in `(a, a+1)`, scanning up from `b = a`.
fn boundary(gap: impl Fn(f64) -> Option<f64>, a: f64) -> Option<f64> {
    let steps = 400;
    let at = |i: usize| a + i as f64 / steps as f64;
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..steps {
        let b = at(i);
        let Some(g) = gap(b) else {
            prev = None;
            continue;
        };
        if let Some((b0, g0)) = prev {
            if g0 > 0.0 && g <= 0.0 {
                return brent_root(|x| gap(x).unwrap_or(f64::NAN), b0, b, 1e-15, 200).ok();
            }
        }
        prev = Some((b, g));
    }
    None
}

/// The Caldiroli–Musina curve, which is also the conjectured symmetry boundary.
pub fn cm_boundary(n: u32, p: f64, a: f64) -> Option<f64> {
    boundary(|b| cm_gap(n, p, a, b), a)
}

pub fn cc_boundary(n: u32, p: f64, a: f64) -> Option<f64> {
    boundary(|b| cc_gap(n, p, a, b), a)
}

/// Verdict for `(N, p, a, b)` from the published criteria.
pub fn classify(n: u32, p: f64, a: f64, b: f64) -> RegionVerdict {
    let nf = n as f64;
    let ac = a_crit(nf, p);
    let finite = [p, a, b].iter().all(|v| v.is_finite());
    if !finite || n < 2 || !(p > 1.0 && p < nf) || !(a < ac) || !(a <= b && b <= a + 1.0) {
        return RegionVerdict::new(Verdict::OutsideScope, "");
    }
    if p == 2.0 {
        return classify_p2(n, a, b);
    }
    if b == a + 1.0 {
        return RegionVerdict::new(Verdict::OpenConjectured, "endpoint b = a+1");
    }
    if a < b && cm_gap(n, p, a, b).is_some_and(|g| g > 0.0) {
        return RegionVerdict::new(Verdict::SymmetryBreaking, "Caldiroli–Musina");
    }
    if a > 0.0 {
        return RegionVerdict::new(Verdict::Symmetric, "Lam–Lu");
    }
    let guard = a == b || p < nf / (2.0 * (1.0 + a - b));
    if guard && cc_gap(n, p, a, b).is_some_and(|g| g <= 0.0) {
        return RegionVerdict::new(Verdict::Symmetric, "Ciraolo–Corso");
    }
    RegionVerdict {
        verdict: Verdict::OpenConjectured,
        provenance: "Ciraolo–Corso conjecture",
        conjectured_margin: cm_gap(n, p, a, b).map(|g| -g),
    }
}

fn classify_p2(n: u32, a: f64, b: f64) -> RegionVerdict {
    if b == a + 1.0 || (a < 0.0 && b == a) {
        return RegionVerdict::new(Verdict::NotAchieved, "Catrina–Wang");
    }
    if a < 0.0 {
        let fs = b_fs(n, a).expect("a < 0");
        return if b < fs {
            RegionVerdict::new(Verdict::SymmetryBreaking, "Felli–Schneider")
        } else {
            RegionVerdict::new(Verdict::Symmetric, "Dolbeault–Esteban–Loss")
        };
    }
    RegionVerdict::new(Verdict::Symmetric, "Dolbeault–Esteban–Loss–Tarantello")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub a: f64,
    pub b: f64,
    pub verdict: RegionVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub name: &'static str,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionMap {
    pub n: u32,
    pub p: f64,
    pub cells: Vec<Cell>,
    pub curves: Vec<Curve>,
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Verdicts on a `na × nb` grid over the two ranges, plus boundary curves
/// sampled at the grid's `a` values. Empty or reversed ranges give no cells.
pub fn region_map(n: u32, p: f64, a_range: (f64, f64), b_range: (f64, f64), na: usize, nb: usize) -> RegionMap {
    let empty = !(a_range.0 <= a_range.1) || !(b_range.0 <= b_range.1);
    let (avals, bvals) = if empty {
        (vec![], vec![])
    } else {
        (linspace(a_range.0, a_range.1, na), linspace(b_range.0, b_range.1, nb))
    };
    let cells: Vec<Cell> = avals
        .par_iter()
        .flat_map_iter(|&a| bvals.iter().map(move |&b| Cell { a, b, verdict: classify(n, p, a, b) }))
        .collect();
    let ac = a_crit(n as f64, p);
    let inside: Vec<f64> = avals.iter().cloned().filter(|&a| a < ac).collect();
    let sample = |f: &dyn Fn(f64) -> Option<f64>| -> Vec<(f64, f64)> {
        inside.iter().filter_map(|&a| f(a).map(|b| (a, b))).collect()
    };
    let mut curves = vec![
        Curve { name: "b_eq_a", points: sample(&|a| Some(a)) },
        Curve { name: "b_eq_a_plus_1", points: sample(&|a| Some(a + 1.0)) },
    ];
    if p == 2.0 {
        curves.push(Curve { name: "b_fs", points: sample(&|a| b_fs(n, a).ok()) });
    } else {
        curves.push(Curve { name: "caldiroli_musina", points: sample(&|a| cm_boundary(n, p, a)) });
    }
    curves.push(Curve { name: "ciraolo_corso", points: sample(&|a| cc_boundary(n, p, a)) });
    curves.push(Curve { name: "conjectured", points: sample(&|a| cm_boundary(n, p, a)) });
    RegionMap { n, p, cells, curves }
}

impl RegionMap {
    pub fn cells_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        let io = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(["a", "b", "verdict", "provenance"]).map_err(io)?;
        for c in &self.cells {
            w.write_record([c.a.to_string(), c.b.to_string(), c.verdict.verdict.as_str().into(), c.verdict.provenance.into()])
                .map_err(io)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?)
            .map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn curve_csv(curve: &Curve) -> String {
        let mut out = String::from("a,b\n");
        for (a, b) in &curve.points {
            out.push_str(&format!("{a},{b}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn b_fs_oracle() {
        // 12.5/(2√10.25) − 2.5
        let want = 12.5 / (2.0 * 10.25f64.sqrt()) - 2.5;
        assert!((b_fs(5, -1.0).unwrap() - want).abs() < 1e-15);
        assert!((b_fs(5, -1.0).unwrap() + 0.547827976392424).abs() < 1e-12);
        assert!(b_fs(5, 0.0).is_err());
        let ac = 1.5;
        let limit = 5.0 * ac / (2.0 * (ac * ac + 4.0f64).sqrt()) - ac;
        assert!((b_fs(5, -1e-12).unwrap() - limit).abs() < 1e-10);
    }

    #[test]
    fn b_fs_sandwich() {
        for n in 3..8 {
            for i in 1..=300 {
                let a = -3.0 * i as f64 / 300.0;
                let b = b_fs(n, a).unwrap();
                assert!(a < b && b < a + 1.0);
            }
        }
    }

    #[test]
    fn caldiroli_musina_matches_b_fs_at_p2() {
        for n in [3u32, 4, 5, 7] {
            for i in 1..=60 {
                let a = -3.0 * i as f64 / 60.0;
                let cm = cm_boundary(n, 2.0, a).unwrap();
                assert!((cm - b_fs(n, a).unwrap()).abs() < 1e-9, "N={n} a={a}");
            }
        }
    }

    #[test]
    fn spec_examples() {
        let v = classify(5, 2.0, -1.0, -0.8);
        assert_eq!(v.verdict, Verdict::SymmetryBreaking);
        assert_eq!(classify(5, 2.0, 0.5, 0.7).verdict, Verdict::Symmetric);
        let v = classify(5, 3.0, 1.0 / 6.0, 1.0 / 3.0);
        assert_eq!((v.verdict, v.provenance), (Verdict::Symmetric, "Lam–Lu"));
        assert_eq!(classify(5, 2.0, -1.0, 0.0).verdict, Verdict::NotAchieved);
        assert_eq!(classify(5, 2.0, -1.0, -1.0).verdict, Verdict::NotAchieved);
        assert_eq!(classify(5, 2.0, 2.0, 2.5).verdict, Verdict::OutsideScope);
        assert_eq!(classify(5, 2.0, -1.0, -1.5).verdict, Verdict::OutsideScope);
    }

    #[test]
    fn closed_boundary_is_symmetric() {
        let a = -1.0;
        let b = b_fs(5, a).unwrap();
        assert_eq!(classify(5, 2.0, a, b).verdict, Verdict::Symmetric);
    }

    #[test]
    fn open_points_carry_a_margin() {
        // a < 0, b = a: no breaking (needs a < b), outside the conjectured region
        let v = classify(5, 3.0, -0.5, -0.5);
        assert_eq!(v.verdict, Verdict::OpenConjectured);
        assert!(v.conjectured_margin.unwrap() < 0.0);
    }

    #[test]
    fn empty_ranges() {
        let m = region_map(5, 2.0, (1.0, 0.0), (0.0, 1.0), 10, 10);
        assert!(m.cells.is_empty());
        assert!(region_map(5, 2.0, (-1.0, 0.0), (0.0, 1.0), 0, 10).cells.is_empty());
    }

    #[test]
    fn p2_no_point_both_ways() {
        let m = region_map(5, 2.0, (-3.0, 1.4), (-3.0, 2.4), 100, 100);
        for c in &m.cells {
            let breaking = c.a < 0.0 && c.a < c.b && c.b < b_fs(5, c.a).unwrap_or(f64::NEG_INFINITY);
            if c.verdict.verdict == Verdict::Symmetric {
                assert!(!breaking);
            }
        }
        assert!(m.cells_csv().unwrap().starts_with("a,b,verdict,provenance\n"));
    }

    proptest! {
        #[test]
        fn ciraolo_corso_inside_conjecture(n in 3u32..9, p in 1.1f64..2.9, a in -3.0f64..0.9, t in 0.0f64..1.0) {
            let b = a + t;
            prop_assume!(p < n as f64 && a < (n as f64 - p) / p);
            if let (Some(cc), Some(cm)) = (cc_gap(n, p, a, b), cm_gap(n, p, a, b)) {
                if cc <= 0.0 {
                    prop_assert!(cm <= 1e-12);
                }
            }
        }

        #[test]
        fn classify_is_total(n in 2u32..9, p in 1.01f64..4.0, a in -4.0f64..3.0, t in -0.5f64..1.5) {
            let v = classify(n, p, a, a + t);
            prop_assert!(v.verdict == Verdict::OutsideScope || !v.provenance.is_empty());
        }
    }
}
