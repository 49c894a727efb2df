//! Backward/forward-sweep power flow for radial networks.
//!
//! Fixed-point iteration on the branch-flow equations: a backward pass
//! accumulates branch flows from the leaves (loads plus downstream losses),
//! a forward pass propagates squared voltages from the root, and the squared
//! current updates as `l = (P^2 + Q^2) / v_from`. Converges for ordinary
//! distribution-feeder parameters and serves as the independent oracle for
//! DistFlow solutions.

/// Branch from `parent` to `child` with series impedance in per-unit.
#[derive(Debug, Clone, Copy)]
pub struct RadialBranch {
    pub parent: usize,
    pub child: usize,
    pub r: f64,
    pub x: f64,
}

/// Radial network: bus 0 is the root with fixed squared voltage `v0`.
/// `load_p[j]`/`load_q[j]` are net consumptions at bus j (negative values
/// inject).
#[derive(Debug, Clone)]
pub struct RadialNet {
    pub n_bus: usize,
    pub v0: f64,
    pub branches: Vec<RadialBranch>,
    pub load_p: Vec<f64>,
    pub load_q: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepSolution {
    /// Squared voltage per bus.
    pub v: Vec<f64>,
    /// Sending-end P, Q and squared current per branch (input order).
    pub flow_p: Vec<f64>,
    pub flow_q: Vec<f64>,
    pub current_sq: Vec<f64>,
    pub iterations: usize,
}

/// Solve by sweep iteration; `tol` is the max-change stopping threshold on
/// all state quantities. Panics on non-tree inputs.
pub fn solve_radial_flow(net: &RadialNet, tol: f64, max_iters: usize) -> SweepSolution {
    let nb = net.branches.len();
    assert_eq!(nb + 1, net.n_bus, "radial network must have n_bus - 1 branches");

    // Order branches so every parent appears before its children.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); net.n_bus];
    for (k, b) in net.branches.iter().enumerate() {
        children[b.parent].push(k);
    }
    let mut order = Vec::with_capacity(nb);
    let mut stack = vec![0usize];
    let mut seen = vec![false; net.n_bus];
    seen[0] = true;
    while let Some(bus) = stack.pop() {
        for &k in &children[bus] {
            let child = net.branches[k].child;
            assert!(!seen[child], "network contains a cycle at bus {child}");
            seen[child] = true;
            order.push(k);
            stack.push(child);
        }
    }
    assert!(seen.iter().all(|&s| s), "network is disconnected");

    let mut v = vec![net.v0; net.n_bus];
    let mut p = vec![0.0; nb];
    let mut q = vec![0.0; nb];
    let mut l = vec![0.0; nb];

    let mut iterations = 0;
    for it in 0..max_iters {
        iterations = it + 1;
        let mut delta: f64 = 0.0;

        // Backward: flows = child load + children's flows + this branch loss.
        let mut new_p = vec![0.0; nb];
        let mut new_q = vec![0.0; nb];
        for &k in order.iter().rev() {
            let b = &net.branches[k];
            let mut pj = net.load_p[b.child];
            let mut qj = net.load_q[b.child];
            for &kc in &children[b.child] {
                pj += new_p[kc];
                qj += new_q[kc];
            }
            new_p[k] = pj + b.r * l[k];
            new_q[k] = qj + b.x * l[k];
        }

        // Forward: voltages from the root, then current updates.
        let mut new_v = v.clone();
        new_v[0] = net.v0;
        let mut new_l = vec![0.0; nb];
        for &k in &order {
            let b = &net.branches[k];
            new_v[b.child] = new_v[b.parent] - 2.0 * (b.r * new_p[k] + b.x * new_q[k])
                + (b.r * b.r + b.x * b.x) * l[k];
            new_l[k] = (new_p[k] * new_p[k] + new_q[k] * new_q[k]) / new_v[b.parent];
        }

        for k in 0..nb {
            delta = delta
                .max((new_p[k] - p[k]).abs())
                .max((new_q[k] - q[k]).abs())
                .max((new_l[k] - l[k]).abs());
        }
        for j in 0..net.n_bus {
            delta = delta.max((new_v[j] - v[j]).abs());
        }
        p = new_p;
        q = new_q;
        l = new_l;
        v = new_v;
        if delta < tol {
            break;
        }
    }

    SweepSolution { v, flow_p: p, flow_q: q, current_sq: l, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_two_bus() {
        let net = RadialNet {
            n_bus: 2,
            v0: 1.0,
            branches: vec![RadialBranch { parent: 0, child: 1, r: 0.0, x: 0.0 }],
            load_p: vec![0.0, 0.4],
            load_q: vec![0.0, 0.1],
        };
        let s = solve_radial_flow(&net, 1e-12, 100);
        assert!((s.flow_p[0] - 0.4).abs() < 1e-12);
        assert!((s.v[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_bus_with_losses_satisfies_branch_equations() {
        let (r, x) = (0.02, 0.04);
        let net = RadialNet {
            n_bus: 2,
            v0: 1.0,
            branches: vec![RadialBranch { parent: 0, child: 1, r, x }],
            load_p: vec![0.0, 0.5],
            load_q: vec![0.0, 0.2],
        };
        let s = solve_radial_flow(&net, 1e-14, 500);
        let (p, q, l, v1) = (s.flow_p[0], s.flow_q[0], s.current_sq[0], s.v[1]);
        assert!((p - 0.5 - r * l).abs() < 1e-10);
        assert!((q - 0.2 - x * l).abs() < 1e-10);
        assert!((l - (p * p + q * q) / 1.0).abs() < 1e-10);
        assert!((v1 - (1.0 - 2.0 * (r * p + x * q) + (r * r + x * x) * l)).abs() < 1e-10);
        assert!(v1 < 1.0);
    }

    #[test]
    fn injection_raises_voltage() {
        let net = RadialNet {
            n_bus: 2,
            v0: 1.0,
            branches: vec![RadialBranch { parent: 0, child: 1, r: 0.02, x: 0.04 }],
            load_p: vec![0.0, -0.5],
            load_q: vec![0.0, 0.0],
        };
        let s = solve_radial_flow(&net, 1e-12, 500);
        assert!(s.v[1] > 1.0);
    }
}
