//! Circuit graph construction and RC long-chain extraction.
//!
//! A long chain is a path of n identical series resistors whose n+1 nodes
//! each carry one identical grounded capacitor. The port end attaches to
//! the rest of the circuit; the far end is closed. Interior nodes touch
//! nothing beyond their chain resistors and their grounded capacitor.
//!
//! Detection walks degree-two paths over "cap-only" nodes, splits them
//! wherever R or C uniformity breaks, and keeps every maximal segment
//! whose far end does not lead back into the core.

use std::collections::{BTreeMap, BTreeSet};

use crate::netlist::{ElementKind, Netlist, GROUND};

/// Default relative tolerance for R/C uniformity. Benchmark netlists
/// repeat literal values, so anything beyond formatting noise splits.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) struct Edge {
    pub a: String,
    pub b: String,
    pub element: usize,
    pub kind: ElementKind,
    pub value: Option<f64>,
}

/// Element-level graph of a netlist. Grounded capacitors are kept out of
/// the edge multiset and indexed per node instead.
#[derive(Debug, Clone)]
pub struct CircuitGraph {
    nodes: BTreeSet<String>,
    edges: Vec<Edge>,
    grounded_caps: BTreeMap<String, Vec<(usize, f64)>>,
    core_nodes: BTreeSet<String>,
    /// Nodes touched by elements of unknown kind; their topology is not
    /// modeled but the contact disqualifies interior chain membership.
    other_touched: Vec<String>,
}

impl CircuitGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Edges between live terminals (grounded caps excluded).
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn resistor_edge_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| e.kind == ElementKind::Resistor && e.a != GROUND && e.b != GROUND)
            .count()
    }

    pub fn grounded_cap_count(&self) -> usize {
        self.grounded_caps.values().map(Vec::len).sum()
    }

    pub fn is_core(&self, node: &str) -> bool {
        self.core_nodes.contains(node)
    }

    pub fn grounded_caps_at(&self, node: &str) -> &[(usize, f64)] {
        self.grounded_caps
            .get(node)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// One detected RC long chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    /// The V_in end, attached to the core (or the designated end of an
    /// isolated path).
    pub port: String,
    /// Ordered interior nodes from the port's neighbor to the closed
    /// terminal. `interior.len() == n`, the series resistor count.
    pub interior: Vec<String>,
    pub r_ohms: f64,
    pub c_farads: f64,
}

impl Chain {
    /// Number of series resistors; the chain has n+1 nodes counting the
    /// port.
    pub fn n(&self) -> usize {
        self.interior.len()
    }

    /// τ_c = RC, the regime-classification time constant.
    pub fn time_constant(&self) -> f64 {
        self.r_ohms * self.c_farads
    }

    /// Interior-node TICER-style constant RC/2, reported for reference.
    pub fn ticer_time_constant(&self) -> f64 {
        0.5 * self.r_ohms * self.c_farads
    }

    /// All chain nodes, port first.
    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.port.as_str()).chain(self.interior.iter().map(String::as_str))
    }

    /// Build a synthetic chain with generated node names, for sweeps and
    /// tests.
    pub fn synthetic(n: usize, r_ohms: f64, c_farads: f64) -> Chain {
        assert!(n >= 1, "chain needs at least one resistor");
        Chain {
            port: "vin".to_string(),
            interior: (1..=n).map(|i| format!("n{i}")).collect(),
            r_ohms,
            c_farads,
        }
    }
}

/// Summary statistics over detected chains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStats {
    /// Distinct non-ground nodes declared by netlist element terminals.
    pub total_nodes_n: usize,
    pub chain_count: usize,
    /// Maximum interior node count (ports excluded) over all chains.
    pub max_len: usize,
    /// Total interior nodes over all chains.
    pub n_tot: usize,
    /// n_tot / total_nodes_n.
    pub split_ratio: f64,
}

/// Build the element graph. One edge per two-terminal element, except
/// capacitors with a ground terminal, which land in `grounded_caps`.
/// MOSFET terminals mark their nodes as core.
pub fn build_graph(netlist: &Netlist) -> CircuitGraph {
    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    let mut grounded_caps: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    let mut core_nodes = BTreeSet::new();
    let mut other_touched = Vec::new();

    for (idx, e) in netlist.elements().enumerate() {
        for n in &e.nodes {
            if n != GROUND {
                nodes.insert(n.clone());
            }
        }
        match e.kind {
            ElementKind::Capacitor => {
                let (a, b) = (&e.nodes[0], &e.nodes[1]);
                let value = e.value.unwrap_or(0.0);
                if a == GROUND && b == GROUND {
                    continue;
                }
                if a == GROUND || b == GROUND {
                    let node = if a == GROUND { b } else { a };
                    grounded_caps
                        .entry(node.clone())
                        .or_default()
                        .push((idx, value));
                } else {
                    edges.push(Edge {
                        a: a.clone(),
                        b: b.clone(),
                        element: idx,
                        kind: e.kind,
                        value: e.value,
                    });
                }
            }
            ElementKind::Resistor | ElementKind::VoltageSource => {
                edges.push(Edge {
                    a: e.nodes[0].clone(),
                    b: e.nodes[1].clone(),
                    element: idx,
                    kind: e.kind,
                    value: e.value,
                });
            }
            ElementKind::Mosfet => {
                for n in &e.nodes {
                    if n != GROUND {
                        core_nodes.insert(n.clone());
                    }
                }
            }
            ElementKind::Other => {
                // Unknown topology: no edge, but the contact counts.
                for n in &e.nodes {
                    if n != GROUND {
                        other_touched.push(n.clone());
                    }
                }
            }
        }
    }

    CircuitGraph {
        nodes,
        edges,
        grounded_caps,
        core_nodes,
        other_touched,
    }
}

fn rel_differs(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() > tol * a.abs().max(b.abs())
}

#[derive(Debug, Default)]
struct NodeFacts {
    /// Non-ground resistor incidences: (neighbor, element idx, ohms).
    r_nn: Vec<(String, usize, f64)>,
    /// Grounded capacitor incidences: (element idx, farads).
    gcaps: Vec<(usize, f64)>,
    /// Any other incidence: V edges, node-to-node caps, unknown elements,
    /// resistors to ground.
    other: usize,
    core: bool,
}

/// End state of a uniform run inside a candidate path.
#[derive(Debug, Clone, PartialEq)]
enum Boundary {
    /// No further connection; a true closed terminal.
    Closed,
    /// A resistor continues into cap-only territory but broke uniformity.
    Break,
    /// A resistor attaches to a core-side node (name, element idx, ohms).
    Anchor(String, usize, f64),
}

/// Extract all maximal RC long chains.
///
/// `rel_tol` bounds the relative spread tolerated in R and C values along
/// one chain; a node where uniformity breaks, or whose non-ground degree
/// exceeds two, terminates the chain there. Output is sorted by port node
/// name, and returned chains are node-disjoint.
pub fn detect_chains(graph: &CircuitGraph, rel_tol: f64) -> Vec<Chain> {
    assert!(
        rel_tol > 0.0 && rel_tol <= 1e-3,
        "rel_tol must lie in (0, 1e-3], got {rel_tol}"
    );

    // Per-node incidence tallies.
    let mut facts: BTreeMap<&str, NodeFacts> = BTreeMap::new();
    for n in &graph.nodes {
        facts.insert(n.as_str(), NodeFacts::default());
    }
    for (node, caps) in &graph.grounded_caps {
        if let Some(f) = facts.get_mut(node.as_str()) {
            f.gcaps = caps.clone();
        }
    }
    for n in &graph.core_nodes {
        if let Some(f) = facts.get_mut(n.as_str()) {
            f.core = true;
        }
    }
    for n in &graph.other_touched {
        if let Some(f) = facts.get_mut(n.as_str()) {
            f.other += 1;
        }
    }
    for e in &graph.edges {
        let grounded = e.a == GROUND || e.b == GROUND;
        if e.kind == ElementKind::Resistor && !grounded {
            let v = e.value.unwrap_or(0.0);
            facts
                .get_mut(e.a.as_str())
                .unwrap()
                .r_nn
                .push((e.b.clone(), e.element, v));
            facts
                .get_mut(e.b.as_str())
                .unwrap()
                .r_nn
                .push((e.a.clone(), e.element, v));
        } else {
            for n in [e.a.as_str(), e.b.as_str()] {
                if n != GROUND {
                    if let Some(f) = facts.get_mut(n) {
                        f.other += 1;
                    }
                }
            }
        }
    }

    // A candidate can sit strictly inside a chain: one grounded cap,
    // nothing external, and at most two chain resistors.
    let is_candidate = |f: &NodeFacts| {
        !f.core && f.other == 0 && f.gcaps.len() == 1 && (1..=2).contains(&f.r_nn.len())
    };
    let candidates: BTreeSet<&str> = facts
        .iter()
        .filter(|(_, f)| is_candidate(f))
        .map(|(n, _)| *n)
        .collect();

    let cand_neighbors = |n: &str| -> Vec<&(String, usize, f64)> {
        facts[n]
            .r_nn
            .iter()
            .filter(|(nb, _, _)| candidates.contains(nb.as_str()))
            .collect()
    };

    // Walk maximal candidate paths starting from ends (candidate degree
    // <= 1 within the candidate set). Pure cycles never start and are
    // ignored.
    let mut visited: BTreeSet<&str> = BTreeSet::new();
    let mut components: Vec<Vec<String>> = Vec::new();
    for &start in &candidates {
        if visited.contains(start) || cand_neighbors(start).len() > 1 {
            continue;
        }
        let mut seq = vec![start.to_string()];
        visited.insert(start);
        let mut prev: Option<String> = None;
        let mut current = start.to_string();
        loop {
            let next = facts[current.as_str()]
                .r_nn
                .iter()
                .find(|(nb, _, _)| {
                    candidates.contains(nb.as_str()) && Some(nb) != prev.as_ref()
                })
                .map(|(nb, _, _)| nb.clone());
            match next {
                Some(nb) if !visited.contains(nb.as_str()) => {
                    let nb_ref: &str = *candidates.get(nb.as_str()).unwrap();
                    visited.insert(nb_ref);
                    prev = Some(current.clone());
                    seq.push(nb.clone());
                    current = nb;
                }
                _ => break,
            }
        }
        components.push(seq);
    }

    // External attachment of an end node: the resistor leading outside the
    // candidate set, if any.
    let attachment = |node: &str, inward: Option<&str>| -> Boundary {
        let outward: Vec<_> = facts[node]
            .r_nn
            .iter()
            .filter(|(nb, _, _)| Some(nb.as_str()) != inward)
            .collect();
        match outward.first() {
            None => Boundary::Closed,
            Some((nb, idx, v)) => Boundary::Anchor(nb.clone(), *idx, *v),
        }
    };

    let mut chains: Vec<Chain> = Vec::new();
    let mut used_ports: BTreeSet<String> = BTreeSet::new();

    for seq in &components {
        let last = seq.len() - 1;
        let (left_attach, right_attach) = if seq.len() == 1 {
            // A lone candidate: zero, one, or two outward resistors. Two
            // means a bridge between core nodes, handled by the
            // anchor/anchor rejection below.
            let outward = &facts[seq[0].as_str()].r_nn;
            match outward.len() {
                0 => (Boundary::Closed, Boundary::Closed),
                1 => {
                    let (nb, idx, v) = &outward[0];
                    (Boundary::Anchor(nb.clone(), *idx, *v), Boundary::Closed)
                }
                _ => {
                    let (na, ia, va) = &outward[0];
                    let (nb, ib, vb) = &outward[1];
                    (
                        Boundary::Anchor(na.clone(), *ia, *va),
                        Boundary::Anchor(nb.clone(), *ib, *vb),
                    )
                }
            }
        } else {
            (
                attachment(&seq[0], Some(seq[1].as_str())),
                attachment(&seq[last], Some(seq[last - 1].as_str())),
            )
        };

        // Split the sequence into maximal uniform runs. Run identity is
        // fixed by its first node's cap and first internal resistor.
        let cap_of = |n: &str| facts[n].gcaps[0].1;
        let r_between = |a: &str, b: &str| -> f64 {
            facts[a]
                .r_nn
                .iter()
                .find(|(nb, _, _)| nb == b)
                .map(|(_, _, v)| *v)
                .expect("adjacent candidates share a resistor")
        };

        let mut runs: Vec<(usize, usize)> = Vec::new(); // inclusive index ranges
        let mut run_start = 0usize;
        for i in 0..last {
            let r = r_between(&seq[i], &seq[i + 1]);
            let run_r = if i == run_start {
                r
            } else {
                r_between(&seq[run_start], &seq[run_start + 1])
            };
            let break_here = rel_differs(run_r, r, rel_tol)
                || rel_differs(cap_of(&seq[run_start]), cap_of(&seq[i + 1]), rel_tol);
            if break_here {
                runs.push((run_start, i));
                run_start = i + 1;
            }
        }
        runs.push((run_start, last));

        for &(lo, hi) in &runs {
            let left = if lo == 0 {
                left_attach.clone()
            } else {
                Boundary::Break
            };
            let right = if hi == last {
                right_attach.clone()
            } else {
                Boundary::Break
            };

            // A chain needs a terminal side that does not lead back into
            // the core; two anchored ends mean a through-connection.
            let (port_side_left, anchor) = match (&left, &right) {
                (Boundary::Anchor(..), Boundary::Anchor(..)) => continue,
                (Boundary::Anchor(a, idx, v), _) => (true, Some((a.clone(), *idx, *v))),
                (_, Boundary::Anchor(a, idx, v)) => (false, Some((a.clone(), *idx, *v))),
                (Boundary::Break, Boundary::Closed) => (true, None),
                (Boundary::Closed, Boundary::Break) => (false, None),
                _ => (seq[lo] <= seq[hi], None), // both closed or both broken
            };

            let ordered: Vec<String> = if port_side_left {
                seq[lo..=hi].to_vec()
            } else {
                seq[lo..=hi].iter().rev().cloned().collect()
            };
            let run_c = cap_of(&ordered[0]);
            let run_r = if ordered.len() >= 2 {
                r_between(&ordered[0], &ordered[1])
            } else {
                anchor.as_ref().map(|(_, _, v)| *v).unwrap_or(0.0)
            };

            // The anchor joins the chain as its port when it carries a
            // matching grounded cap, connects through a matching resistor,
            // is not core-flagged, and is not already spoken for.
            let anchor_as_port = anchor.as_ref().and_then(|(name, _, r)| {
                let f = facts.get(name.as_str())?;
                let ok = !f.core
                    && f.gcaps.len() == 1
                    && !rel_differs(f.gcaps[0].1, run_c, rel_tol)
                    && !rel_differs(*r, run_r, rel_tol)
                    && !used_ports.contains(name);
                ok.then(|| name.clone())
            });

            let (port, interior) = match anchor_as_port {
                Some(p) => (p, ordered),
                None => {
                    let mut it = ordered.into_iter();
                    let p = it.next().unwrap();
                    (p, it.collect::<Vec<_>>())
                }
            };
            if interior.is_empty() {
                continue; // n >= 1 required
            }
            used_ports.insert(port.clone());
            chains.push(Chain {
                port,
                interior,
                r_ohms: run_r,
                c_farads: run_c,
            });
        }
    }

    chains.sort_by(|a, b| a.port.cmp(&b.port));
    chains
}

/// `detect_chains` with the default uniformity tolerance.
pub fn detect_chains_default(graph: &CircuitGraph) -> Vec<Chain> {
    detect_chains(graph, DEFAULT_REL_TOL)
}

/// Summarize chains against the netlist node count. Nodes are counted
/// from element terminals; simulator-internal auxiliary nodes do not
/// exist at this level.
pub fn chain_stats(netlist: &Netlist, chains: &[Chain]) -> ChainStats {
    let total_nodes_n = netlist.node_names().len();
    let n_tot: usize = chains.iter().map(Chain::n).sum();
    let max_len = chains.iter().map(Chain::n).max().unwrap_or(0);
    let split_ratio = if total_nodes_n == 0 {
        0.0
    } else {
        n_tot as f64 / total_nodes_n as f64
    };
    ChainStats {
        total_nodes_n,
        chain_count: chains.len(),
        max_len,
        n_tot,
        split_ratio,
    }
}

/// τ_c = RC for a chain.
pub fn time_constant(chain: &Chain) -> f64 {
    chain.time_constant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::Netlist;
    use std::fmt::Write;

    /// Text for a synthetic netlist holding one path of `count` cap-bearing
    /// nodes (so n = count - 1 resistors), optionally hooked to a core node
    /// driven by a voltage source. `perturb` bumps one mid-path resistor.
    fn path_netlist(count: usize, r: f64, c: f64, attach_core: bool, perturb: Option<usize>) -> String {
        let mut s = String::from("synthetic path\n");
        if attach_core {
            s.push_str("V1 drv 0 DC 1\n");
            s.push_str(&format!("Rport drv p0 {r}\n"));
        }
        for i in 0..count {
            writeln!(s, "C{i} p{i} 0 {c:e}").unwrap();
        }
        for i in 0..count - 1 {
            let rv = match perturb {
                Some(p) if p == i => r * (1.0 + 1e-3),
                _ => r,
            };
            writeln!(s, "R{i} p{i} p{} {rv}", i + 1).unwrap();
        }
        s.push_str(".end\n");
        s
    }

    /// Independent oracle: enumerate every maximal uniform sub-path by
    /// brute force, checking the chain definition node by node.
    fn brute_force_chains(netlist: &Netlist, rel_tol: f64) -> Vec<(String, usize, f64, f64)> {
        let graph = build_graph(netlist);
        // Incidences straight from the netlist.
        let elems: Vec<_> = netlist.elements().collect();
        let mut touch: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, e) in elems.iter().enumerate() {
            for n in &e.nodes {
                if n != GROUND {
                    touch.entry(n.clone()).or_default().push(i);
                }
            }
        }
        let gcap = |n: &str| -> Option<f64> {
            let caps: Vec<f64> = touch
                .get(n)?
                .iter()
                .filter(|&&i| {
                    elems[i].kind == ElementKind::Capacitor && elems[i].nodes.contains(&GROUND.to_string())
                })
                .map(|&i| elems[i].value.unwrap())
                .collect();
            (caps.len() == 1).then(|| caps[0])
        };
        let cap_only = |n: &str| -> bool {
            if graph.is_core(n) {
                return false;
            }
            let Some(list) = touch.get(n) else { return false };
            let mut caps = 0;
            let mut rs = 0;
            for &i in list {
                match elems[i].kind {
                    ElementKind::Capacitor if elems[i].nodes.contains(&GROUND.to_string()) => caps += 1,
                    ElementKind::Resistor if !elems[i].nodes.contains(&GROUND.to_string()) => rs += 1,
                    _ => return false,
                }
            }
            caps == 1 && (1..=2).contains(&rs)
        };
        let r_between = |a: &str, b: &str| -> Option<f64> {
            elems.iter().find_map(|e| {
                (e.kind == ElementKind::Resistor
                    && ((e.nodes[0] == a && e.nodes[1] == b) || (e.nodes[0] == b && e.nodes[1] == a)))
                .then(|| e.value.unwrap())
            })
        };
        let names: Vec<String> = netlist.node_names().into_iter().collect();

        // Try every (port, first-interior) pair, walk greedily, keep the
        // maximal ones satisfying the definition.
        let mut found: Vec<(String, Vec<String>, f64, f64)> = Vec::new();
        for port in &names {
            let Some(c0) = gcap(port) else { continue };
            if graph.is_core(port) {
                continue;
            }
            for next in &names {
                if next == port || !cap_only(next) {
                    continue;
                }
                let Some(r0) = r_between(port, next) else { continue };
                if (gcap(next).unwrap() - c0).abs() > rel_tol * c0.abs() {
                    continue;
                }
                let mut interior = vec![next.clone()];
                let mut prev = port.clone();
                let mut cur = next.clone();
                loop {
                    let step = names.iter().find(|m| {
                        **m != prev
                            && **m != cur
                            && cap_only(m)
                            && r_between(&cur, m)
                                .map(|r| (r - r0).abs() <= rel_tol * r0.abs())
                                .unwrap_or(false)
                            && (gcap(m).unwrap() - c0).abs() <= rel_tol * c0.abs()
                    });
                    match step {
                        Some(m) => {
                            prev = cur.clone();
                            cur = m.clone();
                            interior.push(m.clone());
                        }
                        None => break,
                    }
                }
                // terminal must not continue through a *uniform* resistor
                // into the core, and interior must be cap-only all along.
                found.push((port.clone(), interior, r0, c0));
            }
        }
        // Keep maximal, disjoint interiors (longest first), mirroring the
        // chain definition's maximality clause.
        found.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
        let mut used: BTreeSet<String> = BTreeSet::new();
        let mut out = Vec::new();
        for (port, interior, r, c) in found {
            if interior.iter().any(|n| used.contains(n)) || used.contains(&port) {
                continue;
            }
            for n in &interior {
                used.insert(n.clone());
            }
            used.insert(port.clone());
            out.push((port, interior.len(), r, c));
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    #[test]
    fn build_graph_counts() {
        let net = Netlist::parse("t\nR1 a b 1\nC1 a 0 1f\nC2 b 0 1f\n.end\n").unwrap();
        let g = build_graph(&net);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.grounded_cap_count(), 2);
    }

    #[test]
    fn lone_source_has_no_chain_edges() {
        let net = Netlist::parse("t\nV1 in 0 DC 1\n.end\n").unwrap();
        let g = build_graph(&net);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.resistor_edge_count(), 0);
    }

    #[test]
    fn mosfet_marks_core() {
        let net = Netlist::parse("t\nM1 x g s 0 nmos\n.end\n").unwrap();
        let g = build_graph(&net);
        assert!(g.is_core("x"));
        assert!(g.is_core("g"));
    }

    #[test]
    fn detects_c1355_style_chain() {
        // 79 cap-bearing path nodes, one end on a core node: n = 78.
        let text = path_netlist(79, 0.953316, 0.891774e-15, true, None);
        let net = Netlist::parse(&text).unwrap();
        let chains = detect_chains_default(&build_graph(&net));
        assert_eq!(chains.len(), 1);
        let ch = &chains[0];
        assert_eq!(ch.n(), 78);
        assert_eq!(ch.port, "p0");
        assert_eq!(ch.r_ohms, 0.953316);
        assert_eq!(ch.c_farads, 0.891774e-15);
    }

    #[test]
    fn no_resistors_no_chains() {
        let net = Netlist::parse("t\nC1 a 0 1f\nC2 b 0 1f\nV1 a 0 DC 1\n.end\n").unwrap();
        let chains = detect_chains_default(&build_graph(&net));
        assert!(chains.is_empty());
    }

    #[test]
    fn perturbed_resistor_splits_chain() {
        let text = path_netlist(20, 1.0, 1e-15, true, Some(9));
        let net = Netlist::parse(&text).unwrap();
        let chains = detect_chains_default(&build_graph(&net));
        assert_eq!(chains.len(), 2, "chains: {chains:?}");
        let total_interior: usize = chains.iter().map(Chain::n).sum();
        // One perturbed resistor costs exactly one chain membership: the
        // node pair straddling it splits into two runs.
        assert_eq!(total_interior, 18);

        // Brute-force oracle agrees on ports and lengths.
        let oracle = brute_force_chains(&net, DEFAULT_REL_TOL);
        assert_eq!(oracle.len(), chains.len());
        for (got, exp) in chains.iter().zip(oracle.iter()) {
            assert_eq!(got.port, exp.0);
            assert_eq!(got.n(), exp.1);
        }
    }

    #[test]
    fn unperturbed_path_matches_bruteforce() {
        let text = path_netlist(12, 2.0, 3e-15, true, None);
        let net = Netlist::parse(&text).unwrap();
        let chains = detect_chains_default(&build_graph(&net));
        let oracle = brute_force_chains(&net, DEFAULT_REL_TOL);
        assert_eq!(chains.len(), 1);
        assert_eq!(oracle.len(), 1);
        assert_eq!(chains[0].port, oracle[0].0);
        assert_eq!(chains[0].n(), oracle[0].1);
    }

    #[test]
    fn isolated_path_port_is_lexicographic() {
        // No core attachment at all: both ends closed.
        let text = path_netlist(5, 1.0, 1e-15, false, None);
        let net = Netlist::parse(&text).unwrap();
        let chains = detect_chains_default(&build_graph(&net));
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].port, "p0");
        assert_eq!(chains[0].n(), 4);
    }

    #[test]
    fn through_path_between_two_cores_is_not_a_chain() {
        let mut s = String::from("bridge\nV1 x 0 DC 1\nV2 y 0 DC 1\n");
        s.push_str("Ra x m0 1\n");
        s.push_str("C0 m0 0 1f\nC1 m1 0 1f\n");
        s.push_str("Rm m0 m1 1\n");
        s.push_str("Rb m1 y 1\n.end\n");
        let net = Netlist::parse(&s).unwrap();
        let chains = detect_chains_default(&build_graph(&net));
        assert!(chains.is_empty(), "got {chains:?}");
    }

    #[test]
    fn chains_are_disjoint_and_reconstructible() {
        // Two chains sharing one core hub.
        let mut s = String::from("two chains\nM1 hub g s 0 nmos\n");
        for (tag, len) in [("a", 6usize), ("b", 4usize)] {
            writeln!(s, "R{tag}p hub {tag}0 1").unwrap();
            for i in 0..len {
                writeln!(s, "C{tag}{i} {tag}{i} 0 1f").unwrap();
            }
            for i in 0..len - 1 {
                writeln!(s, "R{tag}{i} {tag}{i} {tag}{} 1", i + 1).unwrap();
            }
        }
        s.push_str(".end\n");
        let net = Netlist::parse(&s).unwrap();
        let chains = detect_chains_default(&build_graph(&net));
        assert_eq!(chains.len(), 2);
        // hub is core (MOSFET), so each chain's port is its first cap node
        assert_eq!(chains[0].port, "a0");
        assert_eq!(chains[0].n(), 5);
        assert_eq!(chains[1].port, "b0");
        assert_eq!(chains[1].n(), 3);

        let mut seen = BTreeSet::new();
        for ch in &chains {
            for node in ch.nodes() {
                assert!(seen.insert(node.to_string()), "node {node} reused");
            }
        }

        // Reconstruction: the induced subgraph holds exactly n resistor
        // edges and n+1 grounded caps.
        let elems: Vec<_> = net.elements().collect();
        for ch in &chains {
            let nodes: BTreeSet<&str> = ch.nodes().collect();
            let r_edges = elems
                .iter()
                .filter(|e| {
                    e.kind == ElementKind::Resistor
                        && nodes.contains(e.nodes[0].as_str())
                        && nodes.contains(e.nodes[1].as_str())
                })
                .count();
            let caps = elems
                .iter()
                .filter(|e| {
                    e.kind == ElementKind::Capacitor
                        && e.nodes.contains(&GROUND.to_string())
                        && e.nodes.iter().any(|n| nodes.contains(n.as_str()))
                })
                .count();
            assert_eq!(r_edges, ch.n());
            assert_eq!(caps, ch.n() + 1);
        }
    }

    #[test]
    fn determinism() {
        let text = path_netlist(30, 1.0, 1e-15, true, Some(14));
        let net = Netlist::parse(&text).unwrap();
        let g = build_graph(&net);
        let a = detect_chains_default(&g);
        let b = detect_chains_default(&g);
        assert_eq!(a, b);
    }

    #[test]
    fn stats_and_time_constants() {
        // 100 non-ground nodes total, one chain of n = 10.
        let mut s = String::from("stats\nV1 drv 0 DC 1\nRhook drv p0 7\n");
        for i in 0..11 {
            writeln!(s, "C{i} p{i} 0 1f").unwrap();
        }
        for i in 0..10 {
            writeln!(s, "R{i} p{i} p{} 1", i + 1).unwrap();
        }
        // Filler: 88 more nodes with no caps (cannot chain).
        for i in 0..44 {
            writeln!(s, "Rf{i} f{i}a f{i}b {}", 10 + i).unwrap();
        }
        s.push_str(".end\n");
        let net = Netlist::parse(&s).unwrap();
        assert_eq!(net.node_names().len(), 100);
        let chains = detect_chains_default(&build_graph(&net));
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].n(), 10);
        let stats = chain_stats(&net, &chains);
        assert_eq!(stats.n_tot, 10);
        assert_eq!(stats.max_len, 10);
        assert!((stats.split_ratio - 0.10).abs() < 1e-12);

        // zero chains
        let empty = chain_stats(&net, &[]);
        assert_eq!(empty.split_ratio, 0.0);

        // time constants
        let ch = Chain::synthetic(1, 1.0, 1e-15);
        assert_eq!(time_constant(&ch), 1e-15);
        let ch = Chain::synthetic(1, 1.0, 1e-7);
        assert_eq!(time_constant(&ch), 1e-7);
        let ch = Chain::synthetic(1, 0.953316, 0.891774e-15);
        assert!((time_constant(&ch) - 8.50142422584e-16).abs() < 1e-27);
        assert!((ch.ticer_time_constant() - 4.25071211292e-16).abs() < 1e-27);
    }

    #[test]
    fn tolerance_guard_allows_formatting_noise() {
        // Same value written two ways parses identically, so stays one chain.
        let mut s = String::from("fmt\nV1 d 0 DC 1\nRp d p0 1\n");
        for i in 0..4 {
            writeln!(s, "C{i} p{i} 0 1e-15").unwrap();
        }
        s.push_str("R0 p0 p1 1.0\nR1 p1 p2 1\nR2 p2 p3 1.000\n.end\n");
        let net = Netlist::parse(&s).unwrap();
        let chains = detect_chains_default(&build_graph(&net));
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].n(), 3);
    }
}
