//! Dinic max-flow over exact rational capacities.

use std::collections::VecDeque;

use num_rational::Ratio;
use num_traits::Zero;

pub type Cap = Ratio<i128>;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: Cap,
    rev: usize,
}

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    graph: Vec<Vec<Edge>>,
    level: Vec<i32>,
    next: Vec<usize>,
}

/// Handle to an edge, for reading its flow after a run.
#[derive(Clone, Copy, Debug)]
pub struct EdgeId {
    from: usize,
    index: usize,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            graph: vec![Vec::new(); nodes],
            level: vec![-1; nodes],
            next: vec![0; nodes],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: Cap) -> EdgeId {
        let index = self.graph[from].len();
        let rev = self.graph[to].len() + usize::from(from == to);
        self.graph[from].push(Edge { to, cap, rev });
        self.graph[to].push(Edge {
            to: from,
            cap: Cap::zero(),
            rev: index,
        });
        EdgeId { from, index }
    }

    /// Flow pushed through an edge: the capacity of its reverse edge.
    pub fn flow(&self, e: EdgeId) -> Cap {
        let edge = &self.graph[e.from][e.index];
        self.graph[edge.to][edge.rev].cap
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for e in &self.graph[v] {
                if e.cap > Cap::zero() && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[v] + 1;
                    queue.push_back(e.to);
                }
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, limit: Cap) -> Cap {
        if v == t {
            return limit;
        }
        while self.next[v] < self.graph[v].len() {
            let i = self.next[v];
            let Edge { to, cap, rev } = self.graph[v][i].clone();
            if cap > Cap::zero() && self.level[to] == self.level[v] + 1 {
                let pushed = self.dfs(to, t, if cap < limit { cap } else { limit });
                if pushed > Cap::zero() {
                    self.graph[v][i].cap -= pushed;
                    self.graph[to][rev].cap += pushed;
                    return pushed;
                }
            }
            self.next[v] += 1;
        }
        Cap::zero()
    }

    /// Maximum `s`–`t` flow. `bound` must be at least the answer (any cut's
    /// capacity works).
    pub fn max_flow(&mut self, s: usize, t: usize, bound: Cap) -> Cap {
        let mut total = Cap::zero();
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return total;
            }
            self.next.iter_mut().for_each(|n| *n = 0);
            loop {
                let f = self.dfs(s, t, bound);
                if f.is_zero() {
                    break;
                }
                total += f;
            }
        }
    }

    /// Nodes reachable from `s` in the residual graph (the source side of a
    /// minimum cut after `max_flow`).
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.graph.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for e in &self.graph[v] {
                if e.cap > Cap::zero() && !seen[e.to] {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i128, d: i128) -> Cap {
        Cap::new(n, d)
    }

    #[test]
    fn small_network() {
        // s=0, t=3; two paths with a cross edge.
        let mut g = FlowNetwork::new(4);
        let a = g.add_edge(0, 1, c(3, 2));
        g.add_edge(0, 2, c(1, 1));
        g.add_edge(1, 2, c(1, 4));
        g.add_edge(1, 3, c(1, 1));
        g.add_edge(2, 3, c(5, 4));
        let f = g.max_flow(0, 3, c(10, 1));
        assert_eq!(f, c(9, 4));
        assert_eq!(g.flow(a), c(5, 4));
        let side = g.source_side(0);
        assert!(side[0] && !side[3]);
    }

    #[test]
    fn disconnected() {
        let mut g = FlowNetwork::new(3);
        g.add_edge(0, 1, c(1, 1));
        assert!(g.max_flow(0, 2, c(1, 1)).is_zero());
    }
}
