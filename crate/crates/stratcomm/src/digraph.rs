//! Tiny directed-graph helpers shared by the cycle searches.

/// Some directed cycle in an adjacency list, in forward order.
pub(crate) fn find_cycle(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = adj.len();
    let mut mark = vec![Mark::New; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        let mut path = vec![root];
        mark[root] = Mark::Open;
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if top.1 < adj[v].len() {
                let w = adj[v][top.1];
                top.1 += 1;
                match mark[w] {
                    Mark::Open => {
                        let pos = path.iter().position(|&p| p == w).expect("open vertex on path");
                        return Some(path[pos..].to_vec());
                    }
                    Mark::New => {
                        mark[w] = Mark::Open;
                        stack.push((w, 0));
                        path.push(w);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
                path.pop();
            }
        }
    }
    None
}
