//! Fixed edge layout of K4 shared by the circuit wiring, the dataset files
//! and the validity metrics.
//!
//! Vertices are `A < B < C < D`. Edge `i` lives on wire `i`:
//! `AB→0, AC→1, AD→2, BC→3, BD→4, CD→5`.

/// Number of edges of K4.
pub const NUM_EDGES: usize = 6;

/// One K4 sample: six edge weights in wire order.
pub type EdgeWeights = [f64; NUM_EDGES];

pub const EDGE_LABELS: [&str; NUM_EDGES] = ["AB", "AC", "AD", "BC", "BD", "CD"];

/// Vertex endpoints `(u, v)` with `u < v` for each edge (A=0 .. D=3).
pub const EDGE_VERTICES: [(usize, usize); NUM_EDGES] =
    [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Edge triples of the four triangles, in order ABC, ABD, ACD, BCD.
pub const TRIANGLES: [[usize; 3]; 4] = [[0, 1, 3], [0, 2, 4], [1, 2, 5], [3, 4, 5]];

/// Vertex-disjoint edge pairs, one per perfect matching: (AB,CD), (AC,BD), (AD,BC).
pub const OPPOSITE_PAIRS: [(usize, usize); 3] = [(0, 5), (1, 4), (2, 3)];

/// Index of the edge joining vertices `u` and `v`.
pub fn edge_index(u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    EDGE_VERTICES
        .iter()
        .position(|&e| e == (a, b))
        .unwrap_or_else(|| panic!("({u}, {v}) is not an edge of K4"))
}

/// Reorders edge weights under a relabeling of the vertices:
/// vertex `i` of the input becomes vertex `perm[i]`.
pub fn relabel(w: &EdgeWeights, perm: [usize; 4]) -> EdgeWeights {
    let mut out = [0.0; NUM_EDGES];
    for (i, &(u, v)) in EDGE_VERTICES.iter().enumerate() {
        out[edge_index(perm[u], perm[v])] = w[i];
    }
    out
}

/// All 24 permutations of four vertex labels.
pub fn vertex_permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                if a == b || a == c || b == c {
                    continue;
                }
                let d = 6 - a - b - c;
                out.push([a, b, c, d]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangles_match_vertex_triples() {
        let triples = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
        for (t, v) in TRIANGLES.iter().zip(triples) {
            let expected = [
                edge_index(v[0], v[1]),
                edge_index(v[0], v[2]),
                edge_index(v[1], v[2]),
            ];
            assert_eq!(*t, expected);
        }
    }

    #[test]
    fn opposite_pairs_are_vertex_disjoint() {
        for (a, b) in OPPOSITE_PAIRS {
            let (u1, v1) = EDGE_VERTICES[a];
            let (u2, v2) = EDGE_VERTICES[b];
            assert!(u1 != u2 && u1 != v2 && v1 != u2 && v1 != v2);
        }
    }

    #[test]
    fn permutations_are_complete() {
        let perms = vertex_permutations();
        assert_eq!(perms.len(), 24);
        let w = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(relabel(&w, [0, 1, 2, 3]), w);
        // Swapping A and B: AC<->BC, AD<->BD, AB and CD fixed.
        assert_eq!(relabel(&w, [1, 0, 2, 3]), [1.0, 4.0, 5.0, 2.0, 3.0, 6.0]);
    }
}
