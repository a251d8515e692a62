//! Peeling decoder on the BEC with process instrumentation.
//!
//! After initialization (known VNs and their edges removed) every iteration
//! picks one degree-one CN uniformly at random, recovers its single erased
//! neighbour and deletes that VN with all its edges. The decoder records the
//! number of degree-one CNs per iteration, from which `r1(tau)` with
//! `tau = iteration / N` follows.
//!
//! Each CN keeps the XOR of its residual VN indices; when its degree is one
//! that XOR *is* the neighbour, so a step costs `O(dv)`.

use std::io::Write;

use rand::Rng;

use crate::ensemble::{ErasurePattern, TannerGraph, NO_EDGE};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from, SimRng};

const ABSENT: u32 = u32::MAX;

/// Set of CN ids with O(1) insert, remove and uniform sampling.
#[derive(Debug, Clone)]
struct IndexedSet {
    members: Vec<u32>,
    slot: Vec<u32>,
}

impl IndexedSet {
    fn new(universe: usize) -> Self {
        IndexedSet { members: Vec::new(), slot: vec![ABSENT; universe] }
    }

    #[inline]
    fn insert(&mut self, c: u32) {
        if self.slot[c as usize] == ABSENT {
            self.slot[c as usize] = self.members.len() as u32;
            self.members.push(c);
        }
    }

    #[inline]
    fn remove(&mut self, c: u32) {
        let s = self.slot[c as usize];
        if s == ABSENT {
            return;
        }
        let last = self.members.pop().unwrap();
        if last != c {
            self.members[s as usize] = last;
            self.slot[last as usize] = s;
        }
        self.slot[c as usize] = ABSENT;
    }

    #[inline]
    fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    fn sample<R: Rng>(&self, rng: &mut R) -> Option<u32> {
        match self.members.len() {
            0 => None,
            n => Some(self.members[rng.random_range(0..n)]),
        }
    }
}

/// Residual-graph bookkeeping shared by the full and the windowed decoder.
///
/// Only CNs whose position lies in the current window are eligible for
/// peeling; the full decoder uses a window spanning every CN position.
#[derive(Debug, Clone)]
pub struct Peeler<'g> {
    graph: &'g TannerGraph,
    unresolved: Vec<bool>,
    cn_degree: Vec<u32>,
    cn_xor: Vec<u32>,
    eligible: IndexedSet,
    window: (usize, usize),
    ones_per_pos: Vec<u32>,
    ones_total: usize,
    vns_per_pos: Vec<u32>,
    residual: usize,
    iteration: usize,
}

impl<'g> Peeler<'g> {
    /// Initialization step: only erased VNs and their edges remain.
    pub fn new(graph: &'g TannerGraph, erasures: &ErasurePattern) -> Result<Self> {
        if erasures.len() != graph.n_vns() {
            return Err(Error::Domain(format!(
                "erasure pattern covers {} VNs, graph has {}",
                erasures.len(),
                graph.n_vns()
            )));
        }
        let p = graph.params();
        let n_cns = graph.n_cns();
        let mut cn_degree = vec![0u32; n_cns];
        let mut cn_xor = vec![0u32; n_cns];
        let mut vns_per_pos = vec![0u32; p.l];
        let mut residual = 0;
        for (v, &e) in erasures.erased.iter().enumerate() {
            if !e {
                continue;
            }
            residual += 1;
            vns_per_pos[graph.vn_position(v)] += 1;
            for &c in graph.vn_slots(v) {
                if c != NO_EDGE {
                    cn_degree[c as usize] += 1;
                    cn_xor[c as usize] ^= v as u32;
                }
            }
        }
        let positions = p.cn_positions();
        let mut ones_per_pos = vec![0u32; positions];
        let mut eligible = IndexedSet::new(n_cns);
        let mut ones_total = 0;
        for (c, &d) in cn_degree.iter().enumerate() {
            if d == 1 {
                ones_per_pos[graph.cn_position(c)] += 1;
                ones_total += 1;
                eligible.insert(c as u32);
            }
        }
        Ok(Peeler {
            graph,
            unresolved: erasures.erased.clone(),
            cn_degree,
            cn_xor,
            eligible,
            window: (0, positions),
            ones_per_pos,
            ones_total,
            vns_per_pos,
            residual,
            iteration: 0,
        })
    }

    /// Restricts peeling to CN positions `lo..hi`.
    pub fn set_window(&mut self, lo: usize, hi: usize) {
        let m = self.graph.params().m();
        let hi = hi.min(self.graph.params().cn_positions());
        let (old_lo, old_hi) = self.window;
        for pos in old_lo..old_hi {
            if pos < lo || pos >= hi {
                for c in pos * m..(pos + 1) * m {
                    self.eligible.remove(c as u32);
                }
            }
        }
        for pos in lo..hi {
            if pos < old_lo || pos >= old_hi {
                for c in pos * m..(pos + 1) * m {
                    if self.cn_degree[c] == 1 {
                        self.eligible.insert(c as u32);
                    }
                }
            }
        }
        self.window = (lo, hi);
    }

    #[inline]
    fn in_window(&self, c: usize) -> bool {
        let pos = self.graph.cn_position(c);
        pos >= self.window.0 && pos < self.window.1
    }

    /// One peeling iteration. Returns the recovered VN, or `None` when no
    /// eligible degree-one CN is left.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> Option<usize> {
        let c = self.eligible.sample(rng)? as usize;
        let v = self.cn_xor[c] as usize;
        debug_assert!(self.unresolved[v]);
        self.remove_vn(v);
        self.iteration += 1;
        Some(v)
    }

    fn remove_vn(&mut self, v: usize) {
        let graph = self.graph;
        self.unresolved[v] = false;
        self.residual -= 1;
        self.vns_per_pos[graph.vn_position(v)] -= 1;
        for &c in graph.vn_slots(v) {
            if c == NO_EDGE {
                continue;
            }
            let ci = c as usize;
            self.cn_xor[ci] ^= v as u32;
            let d = self.cn_degree[ci] - 1;
            self.cn_degree[ci] = d;
            match d {
                1 => {
                    self.ones_per_pos[graph.cn_position(ci)] += 1;
                    self.ones_total += 1;
                    if self.in_window(ci) {
                        self.eligible.insert(c);
                    }
                }
                0 => {
                    self.ones_per_pos[graph.cn_position(ci)] -= 1;
                    self.ones_total -= 1;
                    self.eligible.remove(c);
                }
                _ => {}
            }
        }
    }

    /// Peels until no eligible degree-one CN is left.
    pub fn run<R: Rng>(&mut self, rng: &mut R) {
        while self.step(rng).is_some() {}
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn residual_vn_count(&self) -> usize {
        self.residual
    }

    /// Degree-one CNs in the whole residual graph (not only the window).
    pub fn degree_one_total(&self) -> usize {
        self.ones_total
    }

    pub fn eligible_count(&self) -> usize {
        self.eligible.len()
    }

    pub fn degree_one_per_position(&self) -> &[u32] {
        &self.ones_per_pos
    }

    pub fn residual_per_position(&self) -> &[u32] {
        &self.vns_per_pos
    }

    pub fn is_unresolved(&self, v: usize) -> bool {
        self.unresolved[v]
    }

    pub fn into_state(self) -> ResidualState {
        let m = self.graph.params().m();
        let mut degree_one_set = vec![Vec::new(); self.graph.params().cn_positions()];
        for (c, &d) in self.cn_degree.iter().enumerate() {
            if d == 1 {
                degree_one_set[c / m].push(c);
            }
        }
        ResidualState {
            active_vn: self.unresolved,
            cn_degree: self.cn_degree,
            cn_xor: self.cn_xor,
            degree_one_set,
            iteration: self.iteration,
        }
    }
}

/// Residual graph at halt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualState {
    /// Erased VNs not recovered.
    pub active_vn: Vec<bool>,
    /// Residual degree of every CN.
    pub cn_degree: Vec<u32>,
    /// XOR of the residual neighbours of every CN.
    pub cn_xor: Vec<u32>,
    /// Degree-one CNs grouped by CN position.
    pub degree_one_set: Vec<Vec<usize>>,
    pub iteration: usize,
}

impl ResidualState {
    pub fn residual_vns(&self) -> impl Iterator<Item = usize> + '_ {
        self.active_vn.iter().enumerate().filter(|(_, &a)| a).map(|(v, _)| v)
    }

    pub fn residual_vn_count(&self) -> usize {
        self.active_vn.iter().filter(|&&a| a).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualClass {
    Empty,
    /// Every component is a size-2 stopping set: two VNs sharing all their
    /// CNs, each of those CNs having residual degree 2.
    OnlySize2StoppingSets,
    LargeResidual,
}

/// Classifies the residual graph at halt.
///
/// Mixed residuals (a size-2 set plus anything larger) are `LargeResidual`.
pub fn classify_residual(graph: &TannerGraph, state: &ResidualState) -> ResidualClass {
    let mut any = false;
    for v in state.residual_vns() {
        any = true;
        let mut partner = None;
        for c in graph.vn_neighbors(v) {
            if state.cn_degree[c] != 2 {
                return ResidualClass::LargeResidual;
            }
            let other = (state.cn_xor[c] ^ v as u32) as usize;
            match partner {
                None => partner = Some(other),
                Some(p) if p == other => {}
                Some(_) => return ResidualClass::LargeResidual,
            }
        }
        // partner's CNs must be exactly v's CNs; with every CN of v having
        // degree 2 towards `other`, it suffices that the degrees agree
        if let Some(u) = partner {
            if graph.vn_degree(u) != graph.vn_degree(v) {
                return ResidualClass::LargeResidual;
            }
        }
    }
    if any {
        ResidualClass::OnlySize2StoppingSets
    } else {
        ResidualClass::Empty
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
    /// Failure whose residual consists only of size-2 stopping sets.
    ExpurgatedFailure,
}

/// Recording options for [`peel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceOptions {
    /// Keep per-position degree-one and residual-VN counts.
    pub record_positions: bool,
    /// Record every `stride`-th iteration (the halting iteration is always
    /// recorded).
    pub stride: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { record_positions: false, stride: 1 }
    }
}

/// Per-position series recorded alongside `r1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionSeries {
    /// `R_{1,u}` at each record, flattened `[record][cn_position]`.
    pub degree_one: Vec<u32>,
    /// Residual VN count at each record, flattened `[record][vn_position]`.
    pub residual_vns: Vec<u32>,
    pub cn_positions: usize,
    pub vn_positions: usize,
}

impl PositionSeries {
    pub fn degree_one_at(&self, record: usize) -> &[u32] {
        &self.degree_one[record * self.cn_positions..(record + 1) * self.cn_positions]
    }

    pub fn residual_at(&self, record: usize) -> &[u32] {
        &self.residual_vns[record * self.vn_positions..(record + 1) * self.vn_positions]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeTrace {
    /// Component code length used for normalization.
    pub n: usize,
    /// Iteration index of every record.
    pub iterations: Vec<u32>,
    /// Number of degree-one CNs at every record.
    pub degree_one: Vec<u32>,
    pub iterations_at_halt: usize,
    pub erased_count: usize,
    /// First hit time `iterations_at_halt / N`, present on failure.
    pub tau0: Option<f64>,
    pub residual_vn_count: usize,
    /// VN positions holding unresolved VNs at halt.
    pub residual_blocks: Vec<usize>,
    pub outcome: Outcome,
    pub positions: Option<PositionSeries>,
}

impl DecodeTrace {
    /// `(tau, r1)` pairs.
    pub fn r1(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.n as f64;
        self.iterations
            .iter()
            .zip(&self.degree_one)
            .map(move |(&l, &d)| (l as f64 / n, d as f64 / n))
    }

    /// CSV dump: `iteration,r1,degree_one_total[,R1_u...]`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "iteration,r1,degree_one_total")?;
        if let Some(p) = &self.positions {
            for u in 0..p.cn_positions {
                write!(w, ",R1_{u}")?;
            }
        }
        writeln!(w)?;
        let n = self.n as f64;
        for (rec, (&l, &d)) in self.iterations.iter().zip(&self.degree_one).enumerate() {
            write!(w, "{l},{},{d}", crate::fmt_f64(d as f64 / n))?;
            if let Some(p) = &self.positions {
                for x in p.degree_one_at(rec) {
                    write!(w, ",{x}")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn record(peeler: &Peeler<'_>, trace: &mut DecodeTrace) {
    trace.iterations.push(peeler.iteration() as u32);
    trace.degree_one.push(peeler.degree_one_total() as u32);
    if let Some(p) = trace.positions.as_mut() {
        p.degree_one.extend_from_slice(peeler.degree_one_per_position());
        p.residual_vns.extend_from_slice(peeler.residual_per_position());
    }
}

/// Full-graph peeling with default recording (every iteration).
pub fn peel(
    graph: &TannerGraph,
    erasures: &ErasurePattern,
    seed: u64,
    record_positions: bool,
) -> Result<DecodeTrace> {
    let opts = TraceOptions { record_positions, ..TraceOptions::default() };
    let mut rng = rng_from(derive_seed(seed, &[0x7065_656c]));
    peel_with(graph, erasures, &mut rng, opts).map(|(t, _)| t)
}

/// Full-graph peeling returning the trace and the residual state.
pub fn peel_with(
    graph: &TannerGraph,
    erasures: &ErasurePattern,
    rng: &mut SimRng,
    opts: TraceOptions,
) -> Result<(DecodeTrace, ResidualState)> {
    let stride = opts.stride.max(1);
    let p = graph.params();
    let mut peeler = Peeler::new(graph, erasures)?;
    let erased_count = peeler.residual_vn_count();
    let mut trace = DecodeTrace {
        n: p.n,
        iterations: Vec::new(),
        degree_one: Vec::new(),
        iterations_at_halt: 0,
        erased_count,
        tau0: None,
        residual_vn_count: 0,
        residual_blocks: Vec::new(),
        outcome: Outcome::Success,
        positions: opts.record_positions.then(|| PositionSeries {
            degree_one: Vec::new(),
            residual_vns: Vec::new(),
            cn_positions: p.cn_positions(),
            vn_positions: p.l,
        }),
    };
    record(&peeler, &mut trace);
    while peeler.step(rng).is_some() {
        if peeler.iteration() % stride == 0 {
            record(&peeler, &mut trace);
        }
    }
    let halt = peeler.iteration();
    if *trace.iterations.last().unwrap() as usize != halt {
        record(&peeler, &mut trace);
    }
    trace.iterations_at_halt = halt;
    trace.residual_vn_count = peeler.residual_vn_count();
    trace.residual_blocks = peeler
        .residual_per_position()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(u, _)| u)
        .collect();
    let state = peeler.into_state();
    if trace.residual_vn_count > 0 {
        trace.tau0 = Some(halt as f64 / p.n as f64);
        trace.outcome = match classify_residual(graph, &state) {
            ResidualClass::OnlySize2StoppingSets => Outcome::ExpurgatedFailure,
            _ => Outcome::Failure,
        };
    }
    Ok((trace, state))
}
