//! Greedy two-level map-equation minimization.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mapeq::map_equation;
use super::work::{compact_labels, WorkGraph};
use super::{CdaError, Partition};
use crate::graph::Graph;
use crate::scalar::plogp;
use crate::Scalar;

/// Partition `graph` by minimizing the map equation.
///
/// Local moves accept only strict decreases of the description length;
/// modules are aggregated and the process repeats until a level makes no
/// move. The result is never worse than the all-singletons partition (the
/// starting point) nor the one-module partition (checked at the end).
pub fn infomap<F: Scalar>(graph: &Graph<F>, seed: u64) -> Result<Partition, CdaError> {
    if graph.is_empty() {
        return Err(CdaError::InvalidParameter("graph is empty"));
    }
    let n = graph.node_count();
    if graph.total_weight() <= F::zero() {
        return Ok(Partition::singletons(n));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work = WorkGraph::from_graph(graph);
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let (mut local, moved) = local_moves(&work, &mut rng);
        if !moved {
            break;
        }
        let m = compact_labels(&mut local);
        for c in membership.iter_mut() {
            *c = local[*c];
        }
        work = work.aggregate(&local, m);
    }

    let result = Partition::from_labels(&membership);
    let one = Partition::one_module(n);
    let l_result = map_equation(graph, &result)?.codelength;
    let l_one = map_equation(graph, &one)?.codelength;
    if l_one < l_result {
        return Ok(one);
    }
    Ok(result)
}

/// Running sums from which the module-dependent part of the codelength is
/// evaluated:
/// `L = plogp(Σq) − 2 Σ plogp(q_i) + Σ plogp(q_i + p_i) − Σ_α plogp(p_α)`.
/// The last term is fixed by the node flows and omitted.
#[derive(Clone, Copy)]
struct Codelength<F> {
    sum_exit: F,
    sum_plogp_exit: F,
    sum_plogp_exit_flow: F,
}

impl<F: Scalar> Codelength<F> {
    fn value(&self) -> F {
        plogp(self.sum_exit) - (self.sum_plogp_exit + self.sum_plogp_exit) + self.sum_plogp_exit_flow
    }

    /// Swap module terms `(exit, flow)` for `(new_exit, new_flow)`.
    fn replace(&mut self, exit: F, flow: F, new_exit: F, new_flow: F) {
        self.sum_exit += new_exit - exit;
        self.sum_plogp_exit += plogp(new_exit) - plogp(exit);
        self.sum_plogp_exit_flow += plogp(new_exit + new_flow) - plogp(exit + flow);
    }

    fn with_replaced(&self, exit: F, flow: F, new_exit: F, new_flow: F) -> Self {
        let mut c = *self;
        c.replace(exit, flow, new_exit, new_flow);
        c
    }
}

fn local_moves<F: Scalar>(work: &WorkGraph<F>, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = work.len();
    let two_w = work.total + work.total;
    let two = F::lit(2.0);
    let flow: Vec<F> = work.strength.iter().map(|&s| s / two_w).collect();
    let node_exit: Vec<F> = (0..n).map(|i| ((work.strength[i] - two * work.loops[i]) / two_w).max(F::zero())).collect();

    let mut module: Vec<usize> = (0..n).collect();
    let mut mod_exit = node_exit.clone();
    let mut mod_flow = flow.clone();
    let mut mod_size = vec![1usize; n];
    let mut empty: Vec<usize> = Vec::new();
    let mut code = Codelength {
        sum_exit: mod_exit.iter().copied().sum(),
        sum_plogp_exit: mod_exit.iter().map(|&q| plogp(q)).sum(),
        sum_plogp_exit_flow: mod_exit.iter().zip(&mod_flow).map(|(&q, &p)| plogp(q + p)).sum(),
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut link = vec![F::zero(); n];
    let mut touched: Vec<usize> = Vec::new();
    let tol = F::improvement_tol();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &i in &order {
            let home = module[i];
            touched.clear();
            for &(j, w) in &work.adj[i] {
                let mj = module[j];
                if link[mj] == F::zero() && !touched.contains(&mj) {
                    touched.push(mj);
                }
                link[mj] += w / two_w;
            }
            touched.sort_unstable();

            let (qa, pa) = (node_exit[i], flow[i]);
            let home_exit = mod_exit[home] - qa + two * link[home];
            let home_flow = mod_flow[home] - pa;
            let removed = code.with_replaced(mod_exit[home], mod_flow[home], home_exit, home_flow);

            let current = code.value();
            let mut best: Option<(usize, F, F)> = None;
            let mut best_value = current;
            let mut consider = |target: usize, f_target: F, exit_t: F, flow_t: F| {
                let new_exit = exit_t + qa - two * f_target;
                let new_flow = flow_t + pa;
                let value = removed.with_replaced(exit_t, flow_t, new_exit, new_flow).value();
                if value < best_value - tol {
                    best_value = value;
                    best = Some((target, new_exit, new_flow));
                }
            };
            for &m in &touched {
                if m != home {
                    consider(m, link[m], mod_exit[m], mod_flow[m]);
                }
            }
            if mod_size[home] > 1 {
                if let Some(&e) = empty.last() {
                    consider(e, F::zero(), F::zero(), F::zero());
                }
            }

            if let Some((target, new_exit, new_flow)) = best {
                if empty.last() == Some(&target) {
                    empty.pop();
                }
                code = removed;
                code.replace(mod_exit[target], mod_flow[target], new_exit, new_flow);
                mod_exit[home] = home_exit;
                mod_flow[home] = home_flow;
                mod_exit[target] = new_exit;
                mod_flow[target] = new_flow;
                mod_size[home] -= 1;
                mod_size[target] += 1;
                if mod_size[home] == 0 {
                    empty.push(home);
                }
                module[i] = target;
                moved = true;
            }
            for &m in &touched {
                link[m] = F::zero();
            }
        }
        if !moved {
            break;
        }
        any_move = true;
    }
    (module, any_move)
}
