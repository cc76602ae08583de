use super::Triangulation;

/// Tutte (barycentric) embedding: the boundary cycle P1, P2, P3, P4 on the
/// unit circle, counter-clockwise with P1 on the left and P2 at the bottom,
/// every other vertex at the average of its neighbors.
pub fn tutte_embedding(t: &Triangulation) -> Vec<[f64; 2]> {
    let n = t.vertex_count();
    let cycle: Vec<usize> = t.arcs.iter().flatten().copied().collect();
    let mut pos = vec![[0.0, 0.0]; n];
    let mut fixed = vec![false; n];
    let b = cycle.len().max(1) as f64;
    let offset = (t.arcs[0].len() as f64 - 1.0) / 2.0;
    for (j, &v) in cycle.iter().enumerate() {
        let angle = std::f64::consts::PI + std::f64::consts::TAU * (j as f64 - offset) / b;
        pos[v] = [angle.cos(), angle.sin()];
        fixed[v] = true;
    }

    let mut neighbors = vec![Vec::new(); n];
    for (a, c) in t.edges() {
        neighbors[a].push(c);
        neighbors[c].push(a);
    }
    for _ in 0..20_000 {
        let mut change: f64 = 0.0;
        for v in 0..n {
            if fixed[v] || neighbors[v].is_empty() {
                continue;
            }
            let k = neighbors[v].len() as f64;
            let sum = neighbors[v].iter().fold([0.0, 0.0], |acc, &w| [acc[0] + pos[w][0], acc[1] + pos[w][1]]);
            let next = [sum[0] / k, sum[1] / k];
            change = change.max((next[0] - pos[v][0]).abs() + (next[1] - pos[v][1]).abs());
            pos[v] = next;
        }
        if change < 1e-13 {
            break;
        }
    }
    pos
}
