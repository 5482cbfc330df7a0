//! Interval-valued approximant assembled from boundary curves, splines and
//! local topology-change models.
//!
//! Away from topology changes each boundary curve carries an interpolating
//! cubic spline. Inside the blending window `[t* - 2h, t* + 2h]` of a
//! located change the local polynomial model is authoritative: it decides
//! whether the component or hole still exists at t and supplies the
//! boundary values. Curves whose local model cannot be built are marked
//! unreliable and excluded from evaluation.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geom::interval::IntervalUnion;
use crate::geom::sampled::{Hole, Pct, PctKind, SampledSVF};
use crate::svf1d::assemble::{assemble, EndMarker, EventKind, StripEvent};
use crate::svf1d::interp::Interp1D;
use crate::svf1d::pct::{classify_event, crossing_model, fold_model, PctModel, CROSSING_FIT_DEGREE};

/// Half-width of the model-authoritative window around a topology change,
/// in units of the sample spacing. Each branch feeds k samples into the
/// local fit, so the model has data support out to k steps from the cap;
/// the spline-only zone starts where its own error is already small.
pub const BLEND_HALF_WIDTH_STEPS: f64 = 3.0;

/// One connected boundary piece with its fitted spline.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub first_index: usize,
    pub ys: Vec<f64>,
    pub start_marker: EndMarker,
    pub end_marker: EndMarker,
    pub reliable: bool,
    start_site: Option<usize>,
    end_site: Option<usize>,
    interp: Interp1D,
}

impl BoundaryCurve {
    pub fn last_index(&self) -> usize {
        self.first_index + self.ys.len() - 1
    }

    pub fn spline(&self) -> &Interp1D {
        &self.interp
    }

    /// Sample abscissa/value pairs traced by this curve.
    pub fn samples(&self, h: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let first = self.first_index;
        self.ys
            .iter()
            .enumerate()
            .map(move |(j, &y)| ((first + j) as f64 * h, y))
    }
}

/// A located topology change with its local boundary model.
#[derive(Debug, Clone)]
pub struct PctSite {
    pub pct: Pct,
    pub strip: usize,
    pub event_kind: EventKind,
    /// Ids of the two curves meeting here.
    pub curves: (usize, usize),
    /// Position of the pair in the sorted endpoint list (odd = a hole pair).
    pub position: usize,
    /// Model-authoritative t-range.
    pub window: (f64, f64),
    pub model: PctModel,
}

/// A strip whose topology change could not be modeled.
#[derive(Debug, Clone)]
pub struct UnreliableStrip {
    pub strip: usize,
    pub reason: &'static str,
}

/// Reconstructed set-valued function on [0,1] with interval values.
#[derive(Debug)]
pub struct SVF1DApproximant {
    svf: SampledSVF,
    k: usize,
    p_spline: usize,
    curves: Vec<BoundaryCurve>,
    sites: Vec<PctSite>,
    holes: Vec<Hole>,
    unreliable: Vec<UnreliableStrip>,
    complement_fallback: OnceLock<Option<Box<SVF1DApproximant>>>,
    is_complement: bool,
}

/// Reconstruct the boundary of the graph of an interval-valued function
/// from its samples. `k` controls the fold model (degree 2k-1 through 2k
/// rotated samples); `p_spline` is the curve spline degree (only 3, the
/// not-a-knot cubic, is supported).
pub fn build_approximant(svf: &SampledSVF, k: usize, p_spline: usize) -> Result<SVF1DApproximant> {
    if svf.dim() != 1 {
        return Err(Error::DimensionUnsupported(svf.dim()));
    }
    if p_spline != 3 {
        return Err(Error::UnsupportedDegree(p_spline));
    }
    if k == 0 {
        return Err(Error::InvalidArgument(
            "fold model order k must be at least 1".into(),
        ));
    }
    build_inner(svf.clone(), k, p_spline, false)
}

fn build_inner(
    svf: SampledSVF,
    k: usize,
    p_spline: usize,
    is_complement: bool,
) -> Result<SVF1DApproximant> {
    let asm = assemble(&svf)?;
    let h = svf.h();

    let n_curves = asm.curves.len();
    let mut reliable = vec![true; n_curves];
    let mut start_site: Vec<Option<usize>> = vec![None; n_curves];
    let mut end_site: Vec<Option<usize>> = vec![None; n_curves];
    let mut start_marker: Vec<EndMarker> =
        asm.curves.iter().map(|c| c.start_marker).collect();
    let mut end_marker: Vec<EndMarker> = asm.curves.iter().map(|c| c.end_marker).collect();

    let mut sites: Vec<PctSite> = Vec::new();
    let mut unreliable: Vec<UnreliableStrip> = Vec::new();
    // maps event index to its site, when the model could be built
    let mut event_site: Vec<Option<usize>> = vec![None; asm.events.len()];

    for (ei, ev) in asm.events.iter().enumerate() {
        let modeled = classify_event(&asm.curves, ev, h, k).and_then(|kind| match kind {
            PctKind::Crossing => crossing_model(&asm.curves, ev, h, CROSSING_FIT_DEGREE),
            PctKind::Fold => fold_model(&asm.curves, ev, h, k),
        });
        match modeled {
            Ok((pct, model)) => {
                let site_id = sites.len();
                let marker = match pct.kind {
                    PctKind::Crossing => EndMarker::PctA,
                    PctKind::Fold => EndMarker::PctB,
                };
                for c in [ev.curves.0, ev.curves.1] {
                    match ev.kind {
                        EventKind::Birth => {
                            start_marker[c] = marker;
                            start_site[c] = Some(site_id);
                        }
                        EventKind::Death => {
                            end_marker[c] = marker;
                            end_site[c] = Some(site_id);
                        }
                    }
                }
                event_site[ei] = Some(site_id);
                sites.push(PctSite {
                    pct,
                    strip: ev.strip,
                    event_kind: ev.kind,
                    curves: ev.curves,
                    position: ev.position,
                    window: (
                        (pct.t - BLEND_HALF_WIDTH_STEPS * h).max(0.0),
                        (pct.t + BLEND_HALF_WIDTH_STEPS * h).min(1.0),
                    ),
                    model,
                });
            }
            Err(e) => {
                reliable[ev.curves.0] = false;
                reliable[ev.curves.1] = false;
                unreliable.push(UnreliableStrip {
                    strip: ev.strip,
                    reason: e.kind(),
                });
            }
        }
    }

    let curves: Vec<BoundaryCurve> = asm
        .curves
        .iter()
        .enumerate()
        .map(|(id, rc)| BoundaryCurve {
            first_index: rc.first_index,
            ys: rc.ys.clone(),
            start_marker: start_marker[id],
            end_marker: end_marker[id],
            reliable: reliable[id],
            start_site: start_site[id],
            end_site: end_site[id],
            interp: Interp1D::fit(rc.first_index as f64 * h, h, &rc.ys),
        })
        .collect();

    let holes = collect_holes(&asm.events, &asm.endpoints[0], &curves, &sites, &event_site, h);

    Ok(SVF1DApproximant {
        svf,
        k,
        p_spline,
        curves,
        sites,
        holes,
        unreliable,
        complement_fallback: OnceLock::new(),
        is_complement,
    })
}

fn event_t(
    event: usize,
    events: &[StripEvent],
    sites: &[PctSite],
    event_site: &[Option<usize>],
    h: f64,
) -> f64 {
    match event_site[event] {
        Some(s) => sites[s].pct.t,
        None => (events[event].strip as f64 + 0.5) * h,
    }
}

fn collect_holes(
    events: &[StripEvent],
    first_endpoints: &[f64],
    curves: &[BoundaryCurve],
    sites: &[PctSite],
    event_site: &[Option<usize>],
    h: f64,
) -> Vec<Hole> {
    let raw_end = |cid: usize| -> Option<usize> {
        // recover the raw end event from curve markers via site links, or
        // scan events for the death naming this curve
        events
            .iter()
            .position(|e| e.kind == EventKind::Death && (e.curves.0 == cid || e.curves.1 == cid))
    };
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    // gaps already present at t = 0: pairs at odd positions
    let m = first_endpoints.len();
    let mut j = 1;
    while j + 1 < m {
        pairs.push((j, j + 1, 0.0));
        j += 2;
    }
    for (ei, ev) in events.iter().enumerate() {
        if ev.kind == EventKind::Birth && ev.position % 2 == 1 {
            pairs.push((
                ev.curves.0,
                ev.curves.1,
                event_t(ei, events, sites, event_site, h),
            ));
        }
    }
    let mut holes = Vec::new();
    for (lo, hi, start) in pairs {
        let end_of = |cid: usize| {
            raw_end(cid).map_or(1.0, |e| event_t(e, events, sites, event_site, h))
        };
        let end = end_of(lo).min(end_of(hi));
        if end <= start {
            continue;
        }
        holes.push(Hole {
            start,
            end,
            lower: curves[lo].ys.clone(),
            upper: curves[hi].ys.clone(),
        });
    }
    holes
}

impl SVF1DApproximant {
    pub fn source(&self) -> &SampledSVF {
        &self.svf
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p_spline(&self) -> usize {
        self.p_spline
    }

    pub fn curves(&self) -> &[BoundaryCurve] {
        &self.curves
    }

    pub fn sites(&self) -> &[PctSite] {
        &self.sites
    }

    /// Located points of topology change.
    pub fn pcts(&self) -> Vec<Pct> {
        self.sites.iter().map(|s| s.pct).collect()
    }

    /// Holes of the reconstructed graph (gap pairs over a parameter strip).
    pub fn holes(&self) -> &[Hole] {
        &self.holes
    }

    /// Strips whose topology change could not be modeled; their curves are
    /// excluded from evaluation.
    pub fn unreliable_strips(&self) -> &[UnreliableStrip] {
        &self.unreliable
    }

    /// The reconstructed set at parameter t.
    ///
    /// Within 1e-9 of a sample abscissa the stored sample is returned
    /// verbatim, making the reconstruction interpolatory. Elsewhere all
    /// reliable curves are evaluated, sorted and paired into intervals.
    /// An odd crossing count is retried on the complement.
    pub fn evaluate(&self, t: f64) -> Result<IntervalUnion> {
        if !(-1e-12..=1.0 + 1e-12).contains(&t) {
            return Err(Error::OutOfDomain(t));
        }
        let t = t.clamp(0.0, 1.0);
        let h = self.svf.h();
        let i = (t / h).round() as usize;
        if i < self.svf.len() && (t - i as f64 * h).abs() <= 1e-9 {
            return Ok(self.svf.intervals_at(i)?.clone());
        }
        match self.evaluate_curves(t) {
            Err(e @ Error::InconsistentParity { .. }) if !self.is_complement => {
                match self.complement_approximant() {
                    Some(comp) => match comp.evaluate(t) {
                        Ok(iu) => Ok(iu.complement(0.0, 1.0)),
                        Err(_) => Err(e),
                    },
                    None => Err(e),
                }
            }
            other => other,
        }
    }

    fn complement_approximant(&self) -> Option<&SVF1DApproximant> {
        self.complement_fallback
            .get_or_init(|| {
                let csvf = self.svf.complement().ok()?;
                build_inner(csvf, self.k, self.p_spline, true)
                    .ok()
                    .map(Box::new)
            })
            .as_deref()
    }

    fn evaluate_curves(&self, t: f64) -> Result<IntervalUnion> {
        let mut ys: Vec<f64> = Vec::new();
        for (id, c) in self.curves.iter().enumerate() {
            if !c.reliable {
                continue;
            }
            if let Some(y) = self.curve_value(id, c, t) {
                ys.push(y.clamp(0.0, 1.0));
            }
        }
        ys.sort_by(f64::total_cmp);
        if ys.len() % 2 == 1 {
            return Err(Error::InconsistentParity { t, count: ys.len() });
        }
        let intervals: Vec<(f64, f64)> = ys.chunks(2).map(|p| (p[0], p[1])).collect();
        Ok(IntervalUnion::new(intervals))
    }

    /// Boundary value of one curve at t, or None when the curve does not
    /// exist there. End-of-life is decided by the local models, not by the
    /// sample range.
    fn curve_value(&self, id: usize, c: &BoundaryCurve, t: f64) -> Option<f64> {
        let h = self.svf.h();
        let a_lo = c
            .start_site
            .map_or(c.first_index as f64 * h, |s| self.sites[s].pct.t);
        let a_hi = c
            .end_site
            .map_or(c.last_index() as f64 * h, |s| self.sites[s].pct.t);
        if t < a_lo - 1e-12 || t > a_hi + 1e-12 {
            return None;
        }
        if let Some(s) = c.end_site {
            if let Some(y) = self.site_value(s, id, t) {
                return Some(y);
            }
        }
        if let Some(s) = c.start_site {
            if let Some(y) = self.site_value(s, id, t) {
                return Some(y);
            }
        }
        Some(c.interp.eval(t))
    }

    /// Value the site's local model assigns to `curve_id` at t, or None
    /// when t is outside the model-authoritative range (the spline takes
    /// over there).
    fn site_value(&self, site_id: usize, curve_id: usize, t: f64) -> Option<f64> {
        let s = &self.sites[site_id];
        if t < s.window.0 || t > s.window.1 {
            return None;
        }
        match &s.model {
            PctModel::Crossing { fits } => {
                let p = if curve_id == s.curves.0 { &fits.0 } else { &fits.1 };
                Some(p.eval(t))
            }
            PctModel::Fold { g, bracket } => {
                let y_star = s.pct.y;
                let inner = |cid: usize| -> f64 {
                    let c = &self.curves[cid];
                    match s.event_kind {
                        EventKind::Death => *c.ys.last().unwrap(),
                        EventKind::Birth => c.ys[0],
                    }
                };
                let this_is_lower = if curve_id == s.curves.0 {
                    inner(s.curves.0) <= inner(s.curves.1)
                } else {
                    inner(s.curves.1) < inner(s.curves.0)
                };
                let (ya, yb) = if this_is_lower {
                    (bracket.0, y_star)
                } else {
                    (y_star, bracket.1)
                };
                let f = |y: f64| g.eval(y) - t;
                let (fa, fb) = (f(ya), f(yb));
                if fa == 0.0 {
                    return Some(ya);
                }
                if fb == 0.0 {
                    return Some(yb);
                }
                if (fa < 0.0) == (fb < 0.0) {
                    // t outside the branch's invertible range
                    return None;
                }
                let (mut a, mut b, mut va) = (ya, yb, fa);
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    if (b - a).abs() < 1e-14 {
                        return Some(m);
                    }
                    let vm = f(m);
                    if vm == 0.0 {
                        return Some(m);
                    }
                    if (vm < 0.0) == (va < 0.0) {
                        a = m;
                        va = vm;
                    } else {
                        b = m;
                    }
                }
                Some(0.5 * (a + b))
            }
        }
    }

    /// Points (t, y) on the reconstructed graph boundary, roughly `spacing`
    /// apart. Fold caps are additionally swept over y so the near-vertical
    /// parts of the boundary are covered.
    pub fn boundary_points(&self, spacing: f64) -> Vec<(f64, f64)> {
        let spacing = spacing.max(1e-6);
        let mut out = Vec::new();
        for (id, c) in self.curves.iter().enumerate() {
            if !c.reliable {
                continue;
            }
            let a_lo = c
                .start_site
                .map_or(c.first_index as f64 * self.svf.h(), |s| self.sites[s].pct.t);
            let a_hi = c
                .end_site
                .map_or(c.last_index() as f64 * self.svf.h(), |s| self.sites[s].pct.t);
            if a_hi <= a_lo {
                continue;
            }
            let steps = ((a_hi - a_lo) / spacing).ceil().max(1.0) as usize;
            for j in 0..=steps {
                let t = a_lo + (a_hi - a_lo) * j as f64 / steps as f64;
                if let Some(y) = self.curve_value(id, c, t) {
                    out.push((t, y.clamp(0.0, 1.0)));
                }
            }
        }
        for s in &self.sites {
            if let PctModel::Fold { g, bracket } = &s.model {
                let (blo, bhi) = *bracket;
                if bhi <= blo {
                    continue;
                }
                let steps = ((bhi - blo) / spacing).ceil().max(1.0) as usize;
                for j in 0..=steps {
                    let y = blo + (bhi - blo) * j as f64 / steps as f64;
                    let t = g.eval(y);
                    if (s.window.0..=s.window.1).contains(&t) {
                        out.push((t.clamp(0.0, 1.0), y.clamp(0.0, 1.0)));
                    }
                }
            }
        }
        out
    }
}
