use super::{Dag, Node, NodeSet};
use crate::error::{Error, Result};

/// Whether `x` and `y` are d-separated by `z` in `g`.
///
/// Reachability search over (node, direction) states: a trail may pass a
/// non-collider outside `z`, and a collider that is `z` or has a descendant in `z`.
pub fn d_separated(g: &Dag, x: Node, y: Node, z: &NodeSet) -> Result<bool> {
    g.check_node(x)?;
    g.check_node(y)?;
    for &v in z {
        g.check_node(v)?;
    }
    if x == y {
        return Err(Error::InvalidArgument("d-separation needs two distinct nodes".into()));
    }
    if z.contains(&x) || z.contains(&y) {
        return Err(Error::InvalidArgument("queried nodes must not be in the conditioning set".into()));
    }
    let anc_z = g.ancestors_of_set(z);
    let n = g.n_nodes();
    // visited[v][0]: arrived from a child (moving up); visited[v][1]: arrived from a parent.
    let mut visited = vec![[false; 2]; n];
    let mut stack = vec![(x, 0usize)];
    while let Some((v, dir)) = stack.pop() {
        if visited[v][dir] {
            continue;
        }
        visited[v][dir] = true;
        if v == y {
            return Ok(false);
        }
        let in_z = z.contains(&v);
        if dir == 0 {
            if !in_z {
                stack.extend(g.parents(v).iter().map(|&p| (p, 0)));
                stack.extend(g.children(v).iter().map(|&c| (c, 1)));
            }
        } else {
            if !in_z {
                stack.extend(g.children(v).iter().map(|&c| (c, 1)));
            }
            if anc_z.contains(&v) {
                stack.extend(g.parents(v).iter().map(|&p| (p, 0)));
            }
        }
    }
    Ok(true)
}
