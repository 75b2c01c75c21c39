use super::{Node, NodeSet, Pdag};

/// Neighbours of `x` lying on some chordless path from `x` to `y` whose edges
/// are all either `->` (pointing towards `y`) or undirected.
pub fn critical_set(g: &Pdag, x: Node, y: Node) -> NodeSet {
    let mut out = NodeSet::new();
    if x == y {
        return out;
    }
    let first: NodeSet = g.children(x).union(g.siblings(x)).copied().collect();
    for v in first {
        let mut path = vec![x, v];
        if v == y || search(g, y, &mut path) {
            out.insert(v);
        }
    }
    out
}

fn search(g: &Pdag, y: Node, path: &mut Vec<Node>) -> bool {
    let u = *path.last().expect("path is non-empty");
    let next: Vec<Node> = g.children(u).union(g.siblings(u)).copied().collect();
    for w in next {
        if path.contains(&w) {
            continue;
        }
        // Chordless: w may only touch its predecessor on the path.
        if path[..path.len() - 1].iter().any(|&p| g.is_adjacent(p, w)) {
            continue;
        }
        if w == y {
            return true;
        }
        path.push(w);
        let found = search(g, y, path);
        path.pop();
        if found {
            return true;
        }
    }
    false
}
