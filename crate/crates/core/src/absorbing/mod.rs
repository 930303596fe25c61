//! The absorbing method as an executable pipeline: absorbers and connectors,
//! the absorbing path, a connector reservoir, a greedy cover by long power
//! paths, closing the cycle and absorbing the leftover.
//!
//! Every randomized step is a depth-first search over shuffled candidates
//! with a node budget and a number of restarts. Stage failures are reported
//! with the stage name and the vertex or end pair that could not be handled.

mod config;
mod frame;
mod pipeline;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

pub use config::{PipelineConfig, ResolvedTargets, StageBudget};
pub use pipeline::{run_pipeline, PipelineOutcome, PipelineReport, StageStat, PIPELINE_FLOOR_FACTOR};

use crate::error::{invalid, Error, Result};
use crate::hypergraph::{canonical_set, KGraph};
use crate::power::{spans_power_cycle_unchecked, spans_power_path_unchecked, Parameters, PowerPathInstance};
use frame::EMPTY;

pub const STAGE_HARVEST: &str = "absorber harvest";
pub const STAGE_EXTENSION: &str = "absorber extension";
pub const STAGE_CHAINING: &str = "absorber chaining";
pub const STAGE_RESERVOIR: &str = "reservoir";
pub const STAGE_END_EXTENSION: &str = "end extension";
pub const STAGE_COVER: &str = "cover";
pub const STAGE_CLOSE: &str = "connector exhaustion";
pub const STAGE_ABSORB: &str = "absorb";
pub const STAGE_VERIFY: &str = "verification";

/// Where and why a stage stopped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub vertex: Option<usize>,
    pub pair: Option<(Vec<usize>, Vec<usize>)>,
    pub detail: String,
}

impl StageFailure {
    fn new(stage: &str, detail: impl Into<String>) -> Self {
        StageFailure {
            stage: stage.to_string(),
            vertex: None,
            pair: None,
            detail: detail.into(),
        }
    }

    fn at_vertex(stage: &str, v: usize, detail: impl Into<String>) -> Self {
        StageFailure {
            vertex: Some(v),
            ..Self::new(stage, detail)
        }
    }
}

/// Vertex-disjoint power paths.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSystem {
    pub paths: Vec<PowerPathInstance>,
    pub used_vertices: BTreeSet<usize>,
}

impl PathSystem {
    pub fn push(&mut self, path: PowerPathInstance) -> Result<()> {
        if let Some(&v) = path.order.iter().find(|v| self.used_vertices.contains(v)) {
            return Err(invalid(format!("vertex {v} already used by the path system")));
        }
        self.used_vertices.extend(path.order.iter().copied());
        self.paths.push(path);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Disjointness and the power-path property of every member in `g`.
    pub fn verify(&self, g: &KGraph) -> Result<bool> {
        let mut seen = HashSet::new();
        for p in &self.paths {
            if !p.order.iter().all(|&v| seen.insert(v)) || !p.verify(g)? {
                return Ok(false);
            }
        }
        Ok(seen.len() == self.used_vertices.len())
    }
}

/// A `2h`-window of the absorbing path that absorbs a given vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisteredAbsorber {
    pub offset: usize,
    pub tuple: Vec<usize>,
}

/// Per-vertex absorbers located inside the absorbing path.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorberRegistry {
    pub per_vertex: BTreeMap<usize, Vec<RegisteredAbsorber>>,
}

impl AbsorberRegistry {
    /// Every `2h`-window of `path` that is a `v`-absorber in `g`, for every
    /// vertex `v` off the path.
    pub fn scan(g: &KGraph, h: usize, path: &[usize]) -> Self {
        let on_path: HashSet<usize> = path.iter().copied().collect();
        let mut per_vertex = BTreeMap::new();
        if path.len() < 2 * h {
            return AbsorberRegistry { per_vertex };
        }
        for v in (0..g.n()).filter(|v| !on_path.contains(v)) {
            let list: Vec<RegisteredAbsorber> = (0..=path.len() - 2 * h)
                .filter(|&o| absorbs(g, h, &path[o..o + 2 * h], v))
                .map(|o| RegisteredAbsorber {
                    offset: o,
                    tuple: path[o..o + 2 * h].to_vec(),
                })
                .collect();
            per_vertex.insert(v, list);
        }
        AbsorberRegistry { per_vertex }
    }

    pub fn count(&self, v: usize) -> usize {
        self.per_vertex.get(&v).map_or(0, Vec::len)
    }
}

/// Whether inserting `v` between the two halves of `tuple` spans a power path.
fn absorbs(g: &KGraph, h: usize, tuple: &[usize], v: usize) -> bool {
    let mut seq = Vec::with_capacity(2 * h + 1);
    seq.extend_from_slice(&tuple[..h]);
    seq.push(v);
    seq.extend_from_slice(&tuple[h..]);
    spans_power_path_unchecked(g, h, &seq)
}

/// Whether `tuple` is a `v`-absorber: it spans `P_{2h}^r` and inserting `v`
/// in the middle spans `P_{2h+1}^r`.
pub fn is_absorber(g: &KGraph, r: usize, tuple: &[usize], v: usize) -> Result<bool> {
    let h = g.k() + r - 1;
    if tuple.len() != 2 * h {
        return Err(invalid(format!("absorber must have 2h = {} vertices", 2 * h)));
    }
    let mut all = tuple.to_vec();
    all.push(v);
    canonical_set(&all, g.n())?;
    Ok(spans_power_path_unchecked(g, h, tuple) && absorbs(g, h, tuple, v))
}

fn params_for(g: &KGraph, r: usize) -> Result<Parameters> {
    Parameters::new(g.k(), r)
}

fn mask(n: usize, vertices: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut m = vec![false; n];
    for v in vertices {
        m[v] = true;
    }
    m
}

fn search_absorbers<R: RngCore + ?Sized>(
    g: &KGraph,
    h: usize,
    v: usize,
    blocked: &[bool],
    limit: usize,
    budget: &StageBudget,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let frame = frame::absorber(g.k(), h);
    let mut values = vec![EMPTY; 2 * h + 1];
    values[h] = v;
    let mut found = Vec::new();
    let mut seen = HashSet::new();
    let attempts = budget.restarts.max(limit * 4);
    for _ in 0..attempts {
        if found.len() >= limit {
            break;
        }
        if let Some(seq) = frame.fill(g, &values, blocked, rng, budget.fill_nodes) {
            let tuple: Vec<usize> = seq.iter().copied().filter(|&x| x != v).collect();
            if spans_power_path_unchecked(g, h, &tuple) && absorbs(g, h, &tuple, v) && seen.insert(tuple.clone()) {
                found.push(tuple);
            }
        }
    }
    found
}

/// Up to `limit` distinct `v`-absorbers in `work`, each re-verified.
pub fn find_absorbers<R: RngCore + ?Sized>(
    work: &KGraph,
    r: usize,
    v: usize,
    limit: usize,
    budget: &StageBudget,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let params = params_for(work, r)?;
    if v >= work.n() {
        return Err(invalid(format!("vertex {v} out of range for n = {}", work.n())));
    }
    if work.n() < 2 * params.h + 1 {
        return Ok(Vec::new());
    }
    Ok(search_absorbers(
        work,
        params.h,
        v,
        &vec![false; work.n()],
        limit,
        budget,
        rng,
    ))
}

fn search_connectors<R: RngCore + ?Sized>(
    g: &KGraph,
    h: usize,
    a: &[usize],
    b: &[usize],
    blocked: &[bool],
    limit: usize,
    budget: &StageBudget,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let frame = frame::connector(g.k(), h);
    let mut values = vec![EMPTY; 4 * h];
    values[..h].copy_from_slice(a);
    values[3 * h..].copy_from_slice(b);
    let mut found = Vec::new();
    let mut seen = HashSet::new();
    let attempts = budget.restarts.max(limit * 4);
    for _ in 0..attempts {
        if found.len() >= limit {
            break;
        }
        if let Some(seq) = frame.fill(g, &values, blocked, rng, budget.fill_nodes) {
            if spans_power_path_unchecked(g, h, &seq) && seen.insert(seq[h..3 * h].to_vec()) {
                found.push(seq[h..3 * h].to_vec());
            }
        }
    }
    found
}

/// Up to `limit` tuples `C` with `A C B` spanning `P_{4h}^r` in `work`.
pub fn find_connectors<R: RngCore + ?Sized>(
    work: &KGraph,
    r: usize,
    a: &[usize],
    b: &[usize],
    limit: usize,
    budget: &StageBudget,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let params = params_for(work, r)?;
    let h = params.h;
    if a.len() != h || b.len() != h {
        return Err(invalid(format!("connector ends must have h = {h} vertices")));
    }
    let both: Vec<usize> = a.iter().chain(b).copied().collect();
    canonical_set(&both, work.n()).map_err(|e| match e {
        Error::RepeatedVertex { vertex, .. } => invalid(format!("ends share vertex {vertex}")),
        other => other,
    })?;
    if !work.spans_clique(a)? || !work.spans_clique(b)? {
        return Err(invalid("connector ends must span cliques"));
    }
    Ok(search_connectors(
        work,
        h,
        a,
        b,
        &vec![false; work.n()],
        limit,
        budget,
        rng,
    ))
}

/// Extends `path` by `h` vertices at both ends, using vertices not blocked.
fn extend_both_ends<R: RngCore + ?Sized>(
    g: &KGraph,
    h: usize,
    path: &[usize],
    blocked: &[bool],
    budget: &StageBudget,
    rng: &mut R,
) -> Option<Vec<usize>> {
    let front = frame::extension(g.k(), h, true);
    let back = frame::extension(g.k(), h, false);
    for _ in 0..budget.restarts {
        let mut blk = blocked.to_vec();
        for &v in path {
            blk[v] = true;
        }
        let mut values = vec![EMPTY; 2 * h];
        values[h..].copy_from_slice(&path[..h]);
        let Some(f) = front.fill(g, &values, &blk, rng, budget.fill_nodes) else {
            continue;
        };
        for &v in &f[..h] {
            blk[v] = true;
        }
        let mut values = vec![EMPTY; 2 * h];
        values[..h].copy_from_slice(&path[path.len() - h..]);
        let Some(b) = back.fill(g, &values, &blk, rng, budget.fill_nodes) else {
            continue;
        };
        let mut out = f[..h].to_vec();
        out.extend_from_slice(path);
        out.extend_from_slice(&b[h..]);
        if spans_power_path_unchecked(g, h, &out) {
            return Some(out);
        }
    }
    None
}

/// Samples disjoint copies of `P_len^r` rooted at random free vertices.
fn sample_disjoint_paths<R: RngCore + ?Sized>(
    g: &KGraph,
    h: usize,
    len: usize,
    blocked: &mut [bool],
    wanted: usize,
    budget: &StageBudget,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let frame = frame::rooted_path(g.k(), h, len);
    let mut out = Vec::new();
    let mut failures = 0;
    while out.len() < wanted && failures < budget.restarts {
        let free: Vec<usize> = (0..blocked.len()).filter(|&v| !blocked[v]).collect();
        if free.len() < len {
            break;
        }
        let root = *free.choose(rng).unwrap();
        let mut values = vec![EMPTY; len];
        values[0] = root;
        match frame.fill(g, &values, blocked, rng, budget.fill_nodes) {
            Some(seq) if spans_power_path_unchecked(g, h, &seq) => {
                for &v in &seq {
                    blocked[v] = true;
                }
                out.push(seq);
                failures = 0;
            }
            _ => failures += 1,
        }
    }
    out
}

/// Up to `wanted` vertex-disjoint copies of `P_{2h}^r` inside `allowed`.
///
/// Keeping each of the `X` labelled copies independently with probability
/// `q` keeps `K ~ Bin(X, q)` of them. `X` is counted with a node budget of
/// `fill_nodes · restarts` (a lower bound when the count truncates), `K` is
/// drawn, and then up to `min(K, wanted)` copies are sampled so that each
/// avoids earlier members. Overlap deletion is therefore implicit.
pub fn build_connector_reservoir<R: RngCore + ?Sized>(
    work: &KGraph,
    r: usize,
    allowed: &[usize],
    wanted: usize,
    target: usize,
    q: f64,
    budget: &StageBudget,
    rng: &mut R,
) -> std::result::Result<PathSystem, StageFailure> {
    let fail = |e: Error| StageFailure::new(STAGE_RESERVOIR, e.to_string());
    let params = params_for(work, r).map_err(fail)?;
    let h = params.h;
    let mut blocked = vec![true; work.n()];
    for &v in allowed {
        blocked[v] = false;
    }
    let mut wanted = wanted;
    if q < 1.0 {
        let (sub, _) = work.induced_subgraph(allowed).map_err(fail)?;
        let pattern = crate::power::power_path(work.k(), r, 2 * h).map_err(fail)?;
        let node_budget = budget.fill_nodes.saturating_mul(budget.restarts as u64);
        let x = crate::counting::count_labelled_copies(&pattern, &sub, node_budget)
            .map_err(fail)?
            .labelled_count;
        let q = if q > 0.0 { q } else { 1.0 };
        let kept = rand_distr::Binomial::new(x, q).map(|d| rng.sample(d)).unwrap_or(x);
        wanted = wanted.min(kept.min(usize::MAX as u64) as usize);
    }
    let found = sample_disjoint_paths(work, h, 2 * h, &mut blocked, wanted, budget, rng);
    let mut system = PathSystem::default();
    for seq in found {
        system.push(PowerPathInstance { params, order: seq }).map_err(fail)?;
    }
    if system.len() < target {
        return Err(StageFailure::new(
            STAGE_RESERVOIR,
            format!("{} connectors found, target {target}", system.len()),
        ));
    }
    Ok(system)
}

/// The absorbing path and the absorbers registered along it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorbingPath {
    pub path: PowerPathInstance,
    pub registry: AbsorberRegistry,
    /// Size of the disjoint absorber family before extension and chaining.
    pub family_size: usize,
}

/// Harvests a vertex-disjoint absorber family in which every vertex outside
/// the family has at least `absorber_target` absorbers, extends each absorber
/// by `h` vertices at both ends and chains the pieces with connectors on the
/// remaining vertices.
pub fn build_absorbing_path<R: RngCore + ?Sized>(
    work: &KGraph,
    r: usize,
    absorber_target: usize,
    budget: &StageBudget,
    rng: &mut R,
) -> std::result::Result<AbsorbingPath, StageFailure> {
    let params = params_for(work, r).map_err(|e| StageFailure::new(STAGE_HARVEST, e.to_string()))?;
    let (n, h) = (work.n(), params.h);
    let mut in_family = vec![false; n];
    let mut family: Vec<Vec<usize>> = Vec::new();
    let mut cover = vec![0usize; n];
    for v in 0..n {
        while !in_family[v] && cover[v] < absorber_target {
            let mut blocked = in_family.clone();
            blocked[v] = true;
            let found = search_absorbers(work, h, v, &blocked, 1, budget, rng);
            let Some(t) = found.into_iter().next() else {
                return Err(StageFailure::at_vertex(
                    STAGE_HARVEST,
                    v,
                    format!("{} of {absorber_target} disjoint absorbers found", cover[v]),
                ));
            };
            for &x in &t {
                in_family[x] = true;
            }
            for u in (0..n).filter(|&u| !in_family[u]) {
                if absorbs(work, h, &t, u) {
                    cover[u] += 1;
                }
            }
            family.push(t);
        }
    }
    let family_size = family.len();
    let mut used = in_family;
    let mut pieces = Vec::with_capacity(family.len());
    for t in &family {
        for &v in t {
            used[v] = false;
        }
        let blocked = used.clone();
        let Some(ext) = extend_both_ends(work, h, t, &blocked, budget, rng) else {
            return Err(StageFailure::at_vertex(
                STAGE_EXTENSION,
                t[0],
                "no extension of the absorber found",
            ));
        };
        for &v in &ext {
            used[v] = true;
        }
        pieces.push(ext);
    }
    let mut path = pieces[0].clone();
    for next in &pieces[1..] {
        let a = path[path.len() - h..].to_vec();
        let b = next[..h].to_vec();
        let found = search_connectors(work, h, &a, &b, &used, 1, budget, rng);
        let Some(c) = found.into_iter().next() else {
            return Err(StageFailure {
                pair: Some((a, b)),
                ..StageFailure::new(STAGE_CHAINING, "no connector between consecutive absorbers")
            });
        };
        for &v in &c {
            used[v] = true;
        }
        path.extend(c);
        path.extend_from_slice(next);
    }
    if !spans_power_path_unchecked(work, h, &path) {
        return Err(StageFailure::new(STAGE_VERIFY, "absorbing path failed re-verification"));
    }
    let registry = AbsorberRegistry::scan(work, h, &path);
    if let Some((&v, _)) = registry.per_vertex.iter().find(|(_, l)| l.len() < absorber_target) {
        return Err(StageFailure::at_vertex(
            STAGE_HARVEST,
            v,
            "too few registered absorbers",
        ));
    }
    Ok(AbsorbingPath {
        path: PowerPathInstance { params, order: path },
        registry,
        family_size,
    })
}

/// Vertex-disjoint copies of `P_m^r` avoiding `forbidden`, found one at a time
/// from random roots until none is found within the restart budget or
/// `max_paths` is reached. Returns the system and the uncovered vertices.
pub fn greedy_path_cover<R: RngCore + ?Sized>(
    work: &KGraph,
    r: usize,
    forbidden: &[usize],
    m: usize,
    max_paths: Option<usize>,
    budget: &StageBudget,
    rng: &mut R,
) -> Result<(PathSystem, Vec<usize>)> {
    let params = params_for(work, r)?;
    if m < 2 * params.h {
        return Err(invalid(format!(
            "segment length must be at least 2h = {}",
            2 * params.h
        )));
    }
    let mut blocked = mask(work.n(), forbidden.iter().copied());
    let wanted = max_paths.unwrap_or(usize::MAX);
    let found = sample_disjoint_paths(work, params.h, m, &mut blocked, wanted, budget, rng);
    let mut system = PathSystem::default();
    for seq in found {
        system.push(PowerPathInstance { params, order: seq })?;
    }
    let leftover = (0..work.n()).filter(|&v| !blocked[v]).collect();
    Ok((system, leftover))
}

/// Joins `paths` into one cycle, using for each consecutive end pair the first
/// unused reservoir connector that links them, in either orientation.
pub fn close_cycle(
    work: &KGraph,
    r: usize,
    paths: &[PowerPathInstance],
    reservoir: &PathSystem,
) -> std::result::Result<Vec<usize>, StageFailure> {
    let params = params_for(work, r).map_err(|e| StageFailure::new(STAGE_CLOSE, e.to_string()))?;
    let h = params.h;
    if paths.is_empty() {
        return Err(StageFailure::new(STAGE_CLOSE, "no paths to close"));
    }
    let mut used = vec![false; reservoir.len()];
    let mut order = Vec::new();
    let mut scratch = Vec::with_capacity(4 * h);
    for (i, p) in paths.iter().enumerate() {
        let next = &paths[(i + 1) % paths.len()];
        let (a, b) = (p.end(), next.start());
        let mut chosen = None;
        'search: for (ci, c) in reservoir.paths.iter().enumerate() {
            if used[ci] {
                continue;
            }
            for reverse in [false, true] {
                let mut c_order = c.order.clone();
                if reverse {
                    c_order.reverse();
                }
                scratch.clear();
                scratch.extend_from_slice(a);
                scratch.extend_from_slice(&c_order);
                scratch.extend_from_slice(b);
                if spans_power_path_unchecked(work, h, &scratch) {
                    chosen = Some((ci, c_order));
                    break 'search;
                }
            }
        }
        let Some((ci, c_order)) = chosen else {
            return Err(StageFailure {
                pair: Some((a.to_vec(), b.to_vec())),
                ..StageFailure::new(STAGE_CLOSE, format!("no connector for the end pair after path {i}"))
            });
        };
        used[ci] = true;
        order.extend_from_slice(&p.order);
        order.extend(c_order);
    }
    if !spans_power_cycle_unchecked(work, h, &order) {
        return Err(StageFailure::new(STAGE_VERIFY, "closed cycle failed re-verification"));
    }
    Ok(order)
}

/// Splices every vertex of `leftover` into the middle of one of its registered
/// absorbers in `p_abs`. A window is usable once, and only while no earlier
/// splice fell strictly inside it. The ends of the path never change.
pub fn absorb_leftover(
    p_abs: &PowerPathInstance,
    registry: &AbsorberRegistry,
    leftover: &[usize],
    work: &KGraph,
) -> std::result::Result<PowerPathInstance, StageFailure> {
    splice_leftover(p_abs, registry, leftover, work, false)
}

/// Like [`absorb_leftover`], but once a vertex has no usable registered
/// window the current path is rescanned for any `2h`-window absorbing it.
pub fn absorb_leftover_rescanning(
    p_abs: &PowerPathInstance,
    registry: &AbsorberRegistry,
    leftover: &[usize],
    work: &KGraph,
) -> std::result::Result<PowerPathInstance, StageFailure> {
    splice_leftover(p_abs, registry, leftover, work, true)
}

fn splice_leftover(
    p_abs: &PowerPathInstance,
    registry: &AbsorberRegistry,
    leftover: &[usize],
    work: &KGraph,
    rescan: bool,
) -> std::result::Result<PowerPathInstance, StageFailure> {
    let h = p_abs.params.h;
    let mut path = p_abs.order.clone();
    // (offset, intact, consumed) for each distinct registered window.
    let mut windows: Vec<(usize, bool, bool)> = Vec::new();
    let mut by_offset: BTreeMap<usize, usize> = BTreeMap::new();
    let mut per_vertex: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&v, list) in &registry.per_vertex {
        for a in list {
            let idx = *by_offset.entry(a.offset).or_insert_with(|| {
                windows.push((
                    a.offset,
                    path.get(a.offset..a.offset + 2 * h) == Some(&a.tuple[..]),
                    false,
                ));
                windows.len() - 1
            });
            per_vertex.entry(v).or_default().push(idx);
        }
    }
    let mut on_path: HashSet<usize> = path.iter().copied().collect();
    let mut sorted = leftover.to_vec();
    sorted.sort_unstable();
    for v in sorted {
        if !on_path.insert(v) {
            return Err(StageFailure::at_vertex(STAGE_ABSORB, v, "vertex already on the path"));
        }
        let registered = per_vertex
            .get(&v)
            .and_then(|l| l.iter().copied().find(|&w| windows[w].1 && !windows[w].2));
        let offset = match registered {
            Some(w) => {
                windows[w].2 = true;
                windows[w].0
            }
            None => {
                let found = if rescan {
                    (0..=path.len() - 2 * h).find(|&o| absorbs(work, h, &path[o..o + 2 * h], v))
                } else {
                    None
                };
                let Some(o) = found else {
                    return Err(StageFailure::at_vertex(STAGE_ABSORB, v, "no unused absorber"));
                };
                o
            }
        };
        let at = offset + h;
        path.insert(at, v);
        for w in windows.iter_mut() {
            if at <= w.0 {
                w.0 += 1;
            } else if at < w.0 + 2 * h {
                w.1 = false;
            }
        }
    }
    if path[..h] != p_abs.order[..h]
        || path[path.len() - h..] != p_abs.order[p_abs.order.len() - h..]
        || !spans_power_path_unchecked(work, h, &path)
    {
        return Err(StageFailure::new(STAGE_VERIFY, "absorbed path failed re-verification"));
    }
    Ok(PowerPathInstance {
        params: p_abs.params,
        order: path,
    })
}
