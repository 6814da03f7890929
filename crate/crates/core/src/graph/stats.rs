use serde::{Deserialize, Serialize};

use super::SocialGraph;

/// Whole-network properties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub node_count: usize,
    pub edge_count: usize,
    /// Directed edges per node.
    pub avg_degree: f64,
    /// Mean local clustering coefficient on the undirected projection;
    /// nodes of degree < 2 contribute 0.
    pub avg_clustering_coefficient: f64,
    /// Connected components of the undirected projection, isolated nodes included.
    pub connected_components: usize,
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

pub fn network_stats(g: &SocialGraph) -> NetworkStats {
    let n = g.node_count();
    if n == 0 {
        return NetworkStats {
            node_count: 0,
            edge_count: 0,
            avg_degree: 0.0,
            avg_clustering_coefficient: 0.0,
            connected_components: 0,
        };
    }
    let view = g.undirected();

    let mut mark = vec![u32::MAX; n];
    let mut clustering_sum = 0.0;
    for v in 0..n {
        let nbrs = view.neighbors(v);
        let d = nbrs.len();
        if d < 2 {
            continue;
        }
        for &u in nbrs {
            mark[u as usize] = v as u32;
        }
        let mut links = 0usize;
        for &u in nbrs {
            links += view
                .neighbors(u as usize)
                .iter()
                .filter(|&&w| mark[w as usize] == v as u32)
                .count();
        }
        // each triangle edge seen from both ends
        let triangles = links / 2;
        clustering_sum += triangles as f64 / (d * (d - 1) / 2) as f64;
    }

    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut components = n;
    for (a, b) in g.edges() {
        let (ra, rb) = (find(&mut parent, a.0), find(&mut parent, b.0));
        if ra != rb {
            parent[ra as usize] = rb;
            components -= 1;
        }
    }

    NetworkStats {
        node_count: n,
        edge_count: g.edge_count(),
        avg_degree: g.edge_count() as f64 / n as f64,
        avg_clustering_coefficient: clustering_sum / n as f64,
        connected_components: components,
    }
}
