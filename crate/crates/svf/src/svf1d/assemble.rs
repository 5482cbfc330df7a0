//! Boundary-curve assembly for interval-valued samples.
//!
//! Endpoints of consecutive samples are matched in sorted order; a change
//! in endpoint count, or an in-order match whose displacement exceeds the
//! pairing threshold, marks the strip as containing a topology change.
//! Each strip may hold several births or several deaths of disjoint
//! adjacent endpoint pairs (components appearing at distinct heights at
//! once); a mixed birth-and-death step, such as an in-place component
//! swap, is rejected as undersampled.

use crate::error::{Error, Result};
use crate::geom::sampled::SampledSVF;

/// Endpoints of every sample, sorted; even positions are lower endpoints,
/// odd positions upper.
pub fn detect_boundary_points(svf: &SampledSVF) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(svf.len());
    for i in 0..svf.len() {
        out.push(svf.intervals_at(i)?.endpoints());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// A pair of endpoints appears between sample i and i+1.
    Birth,
    /// A pair of endpoints disappears between sample i and i+1.
    Death,
}

#[derive(Debug, Clone)]
pub struct StripEvent {
    pub strip: usize,
    pub kind: EventKind,
    /// Ids of the two curves meeting at the event.
    pub curves: (usize, usize),
    /// Position of the pair in the sorted endpoint list (even = component
    /// edge pair, odd = gap pair inside a component).
    pub position: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndMarker {
    None,
    PctA,
    PctB,
    DomainEdge,
}

/// One connected boundary piece: y values at consecutive sample indices.
#[derive(Debug, Clone)]
pub struct RawCurve {
    pub first_index: usize,
    pub ys: Vec<f64>,
    pub start_marker: EndMarker,
    pub end_marker: EndMarker,
    pub start_event: Option<usize>,
    pub end_event: Option<usize>,
}

impl RawCurve {
    pub fn last_index(&self) -> usize {
        self.first_index + self.ys.len() - 1
    }
}

#[derive(Debug, Clone)]
pub struct Assembly {
    pub endpoints: Vec<Vec<f64>>,
    pub curves: Vec<RawCurve>,
    pub events: Vec<StripEvent>,
}

enum StepMatch {
    Aligned,
    /// Pair start positions in the next sample's endpoint list, ascending.
    Births { ats: Vec<usize> },
    /// Pair start positions in the previous sample's endpoint list.
    Deaths { ats: Vec<usize> },
}

/// Max in-order displacement when `prev` and `next` have equal lengths.
fn aligned_displacement(prev: &[f64], next: &[f64]) -> f64 {
    prev.iter()
        .zip(next)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Max displacement of the in-order match after removing the disjoint
/// adjacent pairs starting at `ats` from the longer list.
fn displacement_without_pairs(longer: &[f64], shorter: &[f64], ats: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    let mut j = 0usize;
    for (i, &v) in longer.iter().enumerate() {
        if ats.iter().any(|&a| i == a || i == a + 1) {
            continue;
        }
        worst = worst.max((v - shorter[j]).abs());
        j += 1;
    }
    worst
}

/// Pair starts whose removal best matches the remaining endpoints, among
/// all choices of `pairs` disjoint adjacent pairs within the threshold.
fn best_pair_removal(
    longer: &[f64],
    shorter: &[f64],
    pairs: usize,
    thresh: f64,
) -> Option<Vec<usize>> {
    fn recurse(
        longer: &[f64],
        shorter: &[f64],
        pairs: usize,
        from: usize,
        chosen: &mut Vec<usize>,
        thresh: f64,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if pairs == 0 {
            let d = displacement_without_pairs(longer, shorter, chosen);
            if d <= thresh && best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                *best = Some((d, chosen.clone()));
            }
            return;
        }
        let limit = longer.len().saturating_sub(2 * pairs);
        for at in from..=limit {
            chosen.push(at);
            recurse(longer, shorter, pairs - 1, at + 2, chosen, thresh, best);
            chosen.pop();
        }
    }
    let mut best = None;
    recurse(longer, shorter, pairs, 0, &mut Vec::new(), thresh, &mut best);
    best.map(|(_, ats)| ats)
}

fn match_step(prev: &[f64], next: &[f64], thresh: f64, strip: usize) -> Result<StepMatch> {
    if prev.len() == next.len() {
        if aligned_displacement(prev, next) <= thresh {
            return Ok(StepMatch::Aligned);
        }
        // an in-place swap of components needs a death and a birth at once
        return Err(Error::AmbiguousPairing { strip });
    }
    let diff = prev.len().abs_diff(next.len());
    if diff % 2 != 0 {
        return Err(Error::AmbiguousPairing { strip });
    }
    let (longer, shorter) = if next.len() > prev.len() {
        (next, prev)
    } else {
        (prev, next)
    };
    match best_pair_removal(longer, shorter, diff / 2, thresh) {
        Some(ats) if next.len() > prev.len() => Ok(StepMatch::Births { ats }),
        Some(ats) => Ok(StepMatch::Deaths { ats }),
        None => Err(Error::AmbiguousPairing { strip }),
    }
}

/// Pairing threshold per strip: three times the largest displacement seen
/// on the other equal-count steps (leave-one-out, so a single wild jump
/// cannot whitelist itself), floored at half a step.
fn pairing_thresholds(endpoints: &[Vec<f64>], h: f64) -> Vec<f64> {
    let n_steps = endpoints.len() - 1;
    let disp: Vec<Option<f64>> = (0..n_steps)
        .map(|i| {
            (endpoints[i].len() == endpoints[i + 1].len()
                && !endpoints[i].is_empty())
            .then(|| aligned_displacement(&endpoints[i], &endpoints[i + 1]))
        })
        .collect();
    (0..n_steps)
        .map(|s| {
            let other = disp
                .iter()
                .enumerate()
                .filter(|&(i, d)| i != s && d.is_some())
                .map(|(_, d)| d.unwrap())
                .fold(0.0f64, f64::max);
            if other == 0.0 && disp.iter().flatten().count() <= 1 {
                f64::INFINITY
            } else {
                3.0 * other.max(0.5 * h)
            }
        })
        .collect()
}

/// Strips whose samples cannot be joined without a topology change.
pub fn detect_topology_strips(svf: &SampledSVF) -> Result<Vec<usize>> {
    Ok(assemble(svf)?.events.iter().map(|e| e.strip).collect())
}

/// Trace all boundary curves and strip events of an interval-valued SVF.
pub fn assemble(svf: &SampledSVF) -> Result<Assembly> {
    let endpoints = detect_boundary_points(svf)?;
    let thresholds = pairing_thresholds(&endpoints, svf.h());

    let mut curves: Vec<RawCurve> = Vec::new();
    let mut events: Vec<StripEvent> = Vec::new();
    // ids of curves alive at the current sample, sorted by y position
    let mut active: Vec<usize> = Vec::new();

    for (pos, &y) in endpoints[0].iter().enumerate() {
        curves.push(RawCurve {
            first_index: 0,
            ys: vec![y],
            start_marker: EndMarker::DomainEdge,
            end_marker: EndMarker::None,
            start_event: None,
            end_event: None,
        });
        active.push(pos);
    }

    for i in 0..endpoints.len() - 1 {
        let (prev, next) = (&endpoints[i], &endpoints[i + 1]);
        match match_step(prev, next, thresholds[i], i)? {
            StepMatch::Aligned => {
                for (slot, &cid) in active.iter().enumerate() {
                    curves[cid].ys.push(next[slot]);
                }
            }
            StepMatch::Births { ats } => {
                let mut new_active = Vec::with_capacity(active.len() + 2 * ats.len());
                let mut slot = 0usize;
                let mut pos = 0usize;
                while pos < next.len() {
                    if ats.contains(&pos) {
                        let id0 = curves.len();
                        for off in 0..2 {
                            curves.push(RawCurve {
                                first_index: i + 1,
                                ys: vec![next[pos + off]],
                                start_marker: EndMarker::None,
                                end_marker: EndMarker::None,
                                start_event: Some(events.len()),
                                end_event: None,
                            });
                        }
                        events.push(StripEvent {
                            strip: i,
                            kind: EventKind::Birth,
                            curves: (id0, id0 + 1),
                            position: pos,
                        });
                        new_active.push(id0);
                        new_active.push(id0 + 1);
                        pos += 2;
                    } else {
                        let cid = active[slot];
                        curves[cid].ys.push(next[pos]);
                        new_active.push(cid);
                        slot += 1;
                        pos += 1;
                    }
                }
                active = new_active;
            }
            StepMatch::Deaths { ats } => {
                let mut new_active = Vec::with_capacity(active.len() - 2 * ats.len());
                let mut slot_next = 0usize;
                let mut pos = 0usize;
                while pos < prev.len() {
                    if ats.contains(&pos) {
                        let (c0, c1) = (active[pos], active[pos + 1]);
                        for c in [c0, c1] {
                            curves[c].end_event = Some(events.len());
                        }
                        events.push(StripEvent {
                            strip: i,
                            kind: EventKind::Death,
                            curves: (c0, c1),
                            position: pos,
                        });
                        pos += 2;
                    } else {
                        let cid = active[pos];
                        curves[cid].ys.push(next[slot_next]);
                        new_active.push(cid);
                        slot_next += 1;
                        pos += 1;
                    }
                }
                active = new_active;
            }
        }
    }

    for &cid in &active {
        curves[cid].end_marker = EndMarker::DomainEdge;
    }
    Ok(Assembly {
        endpoints,
        curves,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::interval::IntervalUnion;
    use crate::geom::sampled::SampleSet;

    pub fn svf_from(f: impl Fn(f64) -> IntervalUnion, n: usize) -> SampledSVF {
        let samples = (0..=n)
            .map(|i| SampleSet::Intervals(f(i as f64 / n as f64)))
            .collect();
        SampledSVF::new(samples).unwrap()
    }

    #[test]
    fn constant_interval_has_two_curves_no_events() {
        let svf = svf_from(|_| IntervalUnion::single(0.2, 0.8), 10);
        let a = assemble(&svf).unwrap();
        assert_eq!(a.curves.len(), 2);
        assert!(a.events.is_empty());
        assert_eq!(a.curves[0].ys.len(), 11);
        assert_eq!(detect_topology_strips(&svf).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn endpoints_alternate_and_count() {
        let svf = svf_from(
            |_| IntervalUnion::new(vec![(0.1, 0.4), (0.6, 0.9)]),
            4,
        );
        let pts = detect_boundary_points(&svf).unwrap();
        for p in &pts {
            assert_eq!(p, &vec![0.1, 0.4, 0.6, 0.9]);
        }
    }

    #[test]
    fn empty_sample_has_no_endpoints() {
        let svf = svf_from(|_| IntervalUnion::empty(), 3);
        let pts = detect_boundary_points(&svf).unwrap();
        assert!(pts.iter().all(|p| p.is_empty()));
        let a = assemble(&svf).unwrap();
        assert!(a.curves.is_empty());
    }

    #[test]
    fn hole_opening_detected_in_single_strip() {
        // hole over (0.4, 0.6) in y, opening at t = 0.52
        let svf = svf_from(
            |t| {
                if t > 0.52 {
                    IntervalUnion::new(vec![(0.0, 0.4), (0.6, 1.0)])
                } else {
                    IntervalUnion::single(0.0, 1.0)
                }
            },
            10,
        );
        let strips = detect_topology_strips(&svf).unwrap();
        assert_eq!(strips, vec![5]);
        let a = assemble(&svf).unwrap();
        assert_eq!(a.events.len(), 1);
        assert_eq!(a.events[0].kind, EventKind::Birth);
        assert_eq!(a.events[0].position, 1);
        assert_eq!(a.curves.len(), 4);
    }

    #[test]
    fn two_events_in_separate_strips() {
        // component [0.1, 0.3] lives only for t in (0.28, 0.74)
        let svf = svf_from(
            |t| {
                let mut iv = vec![(0.6, 0.9)];
                if t > 0.28 && t < 0.74 {
                    iv.push((0.1, 0.3));
                }
                IntervalUnion::new(iv)
            },
            10,
        );
        let strips = detect_topology_strips(&svf).unwrap();
        assert_eq!(strips, vec![2, 7]);
        let a = assemble(&svf).unwrap();
        assert_eq!(a.events[0].kind, EventKind::Birth);
        assert_eq!(a.events[1].kind, EventKind::Death);
        // the born pair dies at the second event
        assert_eq!(a.events[0].curves, a.events[1].curves);
    }

    #[test]
    fn two_components_born_at_once_in_one_strip() {
        // a thin annulus cut by a chord: both segments appear together
        let svf = svf_from(
            |t| {
                if t > 0.42 && t < 0.58 {
                    IntervalUnion::new(vec![(0.15, 0.35), (0.65, 0.85)])
                } else {
                    IntervalUnion::empty()
                }
            },
            10,
        );
        let a = assemble(&svf).unwrap();
        assert_eq!(a.curves.len(), 4);
        assert_eq!(a.events.len(), 4);
        let births: Vec<&StripEvent> = a
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Birth)
            .collect();
        assert_eq!(births.len(), 2);
        assert_eq!(births[0].strip, births[1].strip);
        assert_eq!(births[0].position, 0);
        assert_eq!(births[1].position, 2);
        // each born pair dies as the same pair
        for b in births {
            assert!(a
                .events
                .iter()
                .any(|e| e.kind == EventKind::Death && e.curves == b.curves));
        }
    }

    #[test]
    fn jump_in_one_strip_is_ambiguous() {
        let svf = svf_from(
            |t| {
                if t < 0.5 {
                    IntervalUnion::single(0.05, 0.15)
                } else {
                    IntervalUnion::single(0.75, 0.85)
                }
            },
            10,
        );
        match assemble(&svf) {
            Err(Error::AmbiguousPairing { strip }) => assert_eq!(strip, 4),
            other => panic!("expected AmbiguousPairing, got {other:?}"),
        }
    }

    #[test]
    fn moving_endpoints_no_false_positives() {
        let svf = svf_from(
            |t| IntervalUnion::single(0.1 + 0.3 * t, 0.9 - 0.2 * t * t),
            16,
        );
        assert!(detect_topology_strips(&svf).unwrap().is_empty());
    }

    #[test]
    fn steep_fold_branch_not_flagged_as_jump() {
        // disk-style branches with sqrt steepening toward the cap at t=0.2
        let svf = svf_from(
            |t| {
                if t < 0.2 {
                    IntervalUnion::empty()
                } else {
                    let w = (0.3 * (t - 0.2)).sqrt();
                    IntervalUnion::single(0.5 - w, 0.5 + w)
                }
            },
            16,
        );
        let a = assemble(&svf).unwrap();
        assert_eq!(a.events.len(), 1);
        assert_eq!(a.events[0].kind, EventKind::Birth);
    }
}
