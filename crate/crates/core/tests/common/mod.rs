#![allow(dead_code)]

use limitlab::limits::ComponentGraph;
use rand::Rng;

/// Random functional graph with a random small set.
pub fn random_graph<R: Rng>(rng: &mut R, max_nodes: usize) -> ComponentGraph {
    let n = rng.gen_range(1..=max_nodes);
    let map: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let small: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
    let x0: Vec<usize> = (0..n).filter(|&i| map[i] == i).collect();
    ComponentGraph {
        nodes: (0..n).map(|i| format!("v{i}")).collect(),
        small,
        map,
        k: vec![2; n],
        x0,
    }
}

/// Nodes of the form `map^k(s)` with `s` small, by iterating each orbit.
pub fn reachable(g: &ComponentGraph) -> Vec<bool> {
    let n = g.len();
    let mut hit = vec![false; n];
    for s in (0..n).filter(|&i| g.small[i]) {
        let mut v = s;
        for _ in 0..=n {
            hit[v] = true;
            v = g.map[v];
        }
    }
    hit
}

/// Marks small a backward-most ancestor of every unreached node.
pub fn saturate(g: &mut ComponentGraph) {
    let n = g.len();
    loop {
        let hit = reachable(g);
        let Some(v) = (0..n).find(|&i| !hit[i]) else { return };
        let mut u = v;
        let mut seen = vec![false; n];
        while !seen[u] {
            seen[u] = true;
            match (0..n).find(|&w| g.map[w] == u && !seen[w]) {
                Some(w) => u = w,
                None => break,
            }
        }
        g.small[u] = true;
    }
}
