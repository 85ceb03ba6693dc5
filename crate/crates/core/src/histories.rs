//! Backward update supports.
//!
//! Read backwards in time, the voter encoding turns the history of each site
//! into a random walk on the cycle: at an update of its current site it is
//! killed if `u <= theta` (the spin was refreshed) and otherwise jumps to the
//! copied neighbour. Walks that land on the same site merge. The surviving
//! positions at the earlier time form the update support.

use std::collections::BTreeSet;
use std::io::Write;

use crate::dynamics::UpdateSequence;
use crate::error::{invalid, Result};
use crate::model::ModelParams;

/// A set of sites of the cycle.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupportSet {
    sites: BTreeSet<usize>,
}

impl SupportSet {
    pub fn new(sites: impl IntoIterator<Item = usize>) -> Self {
        Self { sites: sites.into_iter().collect() }
    }

    pub fn sites(&self) -> &BTreeSet<usize> {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.contains(&site)
    }
}

impl FromIterator<usize> for SupportSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::new(iter)
    }
}

/// A stretch of time `[t_lo, t_hi]` spent at one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t_lo: f64,
    pub t_hi: f64,
    pub site: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryTrajectory {
    pub origin: usize,
    /// Reverse chronological, contiguous from `s2` down to
    /// `max(kill_time, s1)`.
    pub segments: Vec<Segment>,
    pub kill_time: Option<f64>,
    /// Spin set by the refresh that killed the history.
    pub kill_spin: Option<i8>,
}

impl HistoryTrajectory {
    pub fn survived(&self) -> bool {
        self.kill_time.is_none()
    }

    /// Site at the bottom of the trajectory.
    pub fn end_site(&self) -> usize {
        self.segments.last().map_or(self.origin, |s| s.site)
    }

    pub fn jump_count(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }
}

pub(crate) fn cycle_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b) % n;
    d.min(n - d)
}

#[derive(Debug, Clone)]
struct Lineage {
    site: usize,
    alive: bool,
    kill: Option<(f64, i8)>,
    /// `(time, lineage)` this one coalesced into.
    merged: Option<(f64, usize)>,
    segments: Vec<Segment>,
    seg_top: f64,
}

/// Update support of `sites` over the window `(s1, s2]`, with the history
/// of every queried site.
///
/// All histories run through a single reverse sweep of the event list.
pub fn backward_support(
    sites: &[usize],
    s1: f64,
    s2: f64,
    seq: &UpdateSequence,
    p: &ModelParams,
) -> Result<(SupportSet, Vec<HistoryTrajectory>)> {
    let n = p.n();
    if seq.n() != n {
        return Err(invalid(format!("update sequence is for n = {}, model has n = {n}", seq.n())));
    }
    if !(0.0 <= s1 && s1 <= s2) {
        return Err(invalid(format!("need 0 <= s1 <= s2, got s1 = {s1}, s2 = {s2}")));
    }
    if s2 > seq.horizon() {
        return Err(invalid(format!("s2 = {s2} exceeds the sequence horizon {}", seq.horizon())));
    }
    let origins: Vec<usize> = sites.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if let Some(&bad) = origins.iter().find(|&&s| s >= n) {
        return Err(invalid(format!("site {bad} outside 0..{n}")));
    }

    let theta = p.theta();
    let mut lineages: Vec<Lineage> = origins
        .iter()
        .map(|&site| Lineage {
            site,
            alive: true,
            kill: None,
            merged: None,
            segments: Vec::new(),
            seg_top: s2,
        })
        .collect();
    let mut occupant: Vec<Option<usize>> = vec![None; n];
    for (id, l) in lineages.iter().enumerate() {
        occupant[l.site] = Some(id);
    }

    for e in seq.window(s1, s2).iter().rev() {
        let j = e.site as usize;
        let Some(id) = occupant[j] else { continue };
        occupant[j] = None;
        let l = &mut lineages[id];
        l.segments.push(Segment { t_lo: e.time, t_hi: l.seg_top, site: j });
        l.seg_top = e.time;
        if e.u <= theta {
            l.alive = false;
            l.kill = Some((e.time, if e.u <= 0.5 * theta { 1 } else { -1 }));
            continue;
        }
        let dest = e.neighbor as usize;
        match occupant[dest] {
            Some(other) => {
                l.alive = false;
                l.merged = Some((e.time, other));
            }
            None => {
                l.site = dest;
                occupant[dest] = Some(id);
            }
        }
    }
    for l in lineages.iter_mut().filter(|l| l.alive) {
        l.segments.push(Segment { t_lo: s1, t_hi: l.seg_top, site: l.site });
    }

    let support = lineages.iter().filter(|l| l.alive).map(|l| l.site).collect();
    let trajectories = origins
        .iter()
        .enumerate()
        .map(|(id, &origin)| stitch(&lineages, id, origin))
        .collect();
    Ok((support, trajectories))
}

// Follows a lineage through its merges to assemble the full history.
fn stitch(lineages: &[Lineage], start: usize, origin: usize) -> HistoryTrajectory {
    let mut segments = Vec::new();
    let mut id = start;
    let mut from = f64::INFINITY;
    loop {
        let l = &lineages[id];
        segments.extend(
            l.segments
                .iter()
                .filter(|s| s.t_lo < from)
                .map(|s| Segment { t_hi: s.t_hi.min(from), ..*s }),
        );
        match l.merged {
            Some((t, next)) => {
                from = t;
                id = next;
            }
            None => {
                return HistoryTrajectory {
                    origin,
                    segments,
                    kill_time: l.kill.map(|k| k.0),
                    kill_spin: l.kill.map(|k| k.1),
                };
            }
        }
    }
}

/// Spins at the top of the window implied by the histories, given the
/// configuration at the bottom of the window.
pub fn resolve_spins(trajectories: &[HistoryTrajectory], spins_at_s1: &[i8]) -> Vec<i8> {
    trajectories
        .iter()
        .map(|h| h.kill_spin.unwrap_or_else(|| spins_at_s1[h.end_site()]))
        .collect()
}

/// `P(history of one site survives dt) = e^{-theta dt}`.
pub fn survival_probability(p: &ModelParams, dt: f64) -> Result<f64> {
    if dt.is_nan() || dt < 0.0 {
        return Err(invalid(format!("time span must be non-negative, got {dt}")));
    }
    Ok((-p.theta() * dt).exp())
}

/// Largest cycle distance from its origin reached by any history while
/// alive.
pub fn max_displacement(trajectories: &[HistoryTrajectory], n: usize) -> usize {
    trajectories
        .iter()
        .flat_map(|h| h.segments.iter().map(move |s| cycle_distance(s.site, h.origin, n)))
        .max()
        .unwrap_or(0)
}

/// Origins whose history reaches the bottom of the window.
pub fn surviving_origins(trajectories: &[HistoryTrajectory]) -> SupportSet {
    trajectories.iter().filter(|h| h.survived()).map(|h| h.origin).collect()
}

/// Sites `start, start+1, ..., start+len-1` (mod n).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleInterval {
    pub start: usize,
    pub len: usize,
}

impl CycleInterval {
    pub fn sites(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |k| (self.start + k) % n)
    }

    pub fn end(&self, n: usize) -> usize {
        (self.start + self.len - 1) % n
    }
}

/// Distance between the closest sites of two site sets.
pub fn set_distance(a: impl IntoIterator<Item = usize>, b: &[usize], n: usize) -> usize {
    a.into_iter()
        .flat_map(|x| b.iter().map(move |&y| cycle_distance(x, y, n)))
        .min()
        .unwrap_or(usize::MAX)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDecomposition {
    pub intervals: Vec<CycleInterval>,
    /// Backward supports of the intervals; empty until
    /// [`ClusterDecomposition::attach_supports`] runs.
    pub supports: Vec<SupportSet>,
    /// Every interval has length `<= d_max` and any two are at distance
    /// `>= d_sep`.
    pub event_a: bool,
    /// No history travelled beyond the spread threshold; `None` until
    /// supports are attached.
    pub event_b: Option<bool>,
}

/// Default thresholds `(round(ln^2 n), round(ln^3 n))`.
pub fn default_thresholds(n: usize) -> (usize, usize) {
    let l = (n as f64).ln();
    ((l * l).round().max(1.0) as usize, (l * l * l).round().max(1.0) as usize)
}

/// Groups the sites into maximal runs whose consecutive members are less
/// than `d_sep` apart (cyclically), then checks the size and separation
/// conditions.
pub fn cluster_decomposition(
    support: &SupportSet,
    n: usize,
    d_sep: usize,
    d_max: usize,
) -> Result<ClusterDecomposition> {
    if d_sep == 0 || d_max == 0 {
        return Err(invalid("separation and size thresholds must be at least 1"));
    }
    if let Some(&bad) = support.sites().iter().find(|&&s| s >= n) {
        return Err(invalid(format!("site {bad} outside 0..{n}")));
    }
    let sites: Vec<usize> = support.sites().iter().copied().collect();
    let intervals = if sites.is_empty() {
        Vec::new()
    } else {
        let m = sites.len();
        let gap = |k: usize| (sites[(k + 1) % m] + n - sites[k]) % n;
        // cut after position k when the cyclic gap to the next site is wide
        let cuts: Vec<usize> = (0..m).filter(|&k| m == 1 || gap(k) >= d_sep).collect();
        if cuts.is_empty() {
            vec![CycleInterval { start: 0, len: n }]
        } else {
            cuts.iter()
                .enumerate()
                .map(|(c, &k)| {
                    let first = (cuts[(c + cuts.len() - 1) % cuts.len()] + 1) % m;
                    let start = sites[first];
                    let len = (sites[k] + n - start) % n + 1;
                    CycleInterval { start, len }
                })
                .collect::<Vec<_>>()
        }
    };
    let mut intervals = intervals;
    intervals.sort_by_key(|w| w.start);

    let sized = intervals.iter().all(|w| w.len <= d_max);
    let members: Vec<Vec<usize>> = intervals.iter().map(|w| w.sites(n).collect()).collect();
    let separated = (0..members.len()).all(|i| {
        (i + 1..members.len())
            .all(|j| set_distance(members[i].iter().copied(), &members[j], n) >= d_sep)
    });
    Ok(ClusterDecomposition {
        intervals,
        supports: Vec::new(),
        event_a: sized && separated,
        event_b: None,
    })
}

impl ClusterDecomposition {
    /// Computes `V_i`, the backward support of each interval over
    /// `(s1, s2]`, and the spread event over all sites.
    pub fn attach_supports(
        &mut self,
        seq: &UpdateSequence,
        p: &ModelParams,
        s1: f64,
        s2: f64,
        spread_threshold: usize,
    ) -> Result<()> {
        let n = p.n();
        self.supports = self
            .intervals
            .iter()
            .map(|w| backward_support(&w.sites(n).collect::<Vec<_>>(), s1, s2, seq, p).map(|r| r.0))
            .collect::<Result<_>>()?;
        let all: Vec<usize> = (0..n).collect();
        let (_, histories) = backward_support(&all, s1, s2, seq, p)?;
        self.event_b = Some(max_displacement(&histories, n) <= spread_threshold);
        Ok(())
    }
}

/// Writes one CSV row per trajectory segment:
/// `replica,origin,t_start,t_end,site,killed_flag`.
pub fn write_trajectories_csv<W: Write>(
    out: &mut W,
    replica: usize,
    trajectories: &[HistoryTrajectory],
) -> std::io::Result<()> {
    for h in trajectories {
        let killed = u8::from(!h.survived());
        for s in &h.segments {
            writeln!(out, "{replica},{},{},{},{},{killed}", h.origin, s.t_lo, s.t_hi, s.site)?;
        }
    }
    Ok(())
}

pub const TRAJECTORY_CSV_HEADER: &str = "replica,origin,t_start,t_end,site,killed_flag";
