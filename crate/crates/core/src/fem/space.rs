use crate::geometry::Mesh;
use crate::linalg::{reverse_cuthill_mckee, Skyline};

/// Per-mesh finite-element tables: element areas, basis gradients, lumped
/// masses and the interior-unknown numbering with its Hessian envelope.
#[derive(Clone, Debug)]
pub struct FemSpace {
    pub(crate) areas: Vec<f64>,
    /// `grads[t][k]` is the gradient of the hat function of local vertex `k`.
    pub(crate) grads: Vec<[[f64; 2]; 3]>,
    pub(crate) lumped: Vec<f64>,
    /// Unknown index of each node (`usize::MAX` on the boundary).
    pub(crate) dof_of_node: Vec<usize>,
    pub(crate) node_of_dof: Vec<usize>,
    /// Empty matrix with the Hessian's envelope, in unknown numbering.
    pub(crate) pattern: Skyline,
}

pub(crate) const NO_DOF: usize = usize::MAX;

impl FemSpace {
    pub(crate) fn new(mesh: &Mesh) -> Self {
        let nodes = mesh.nodes();
        let mut areas = Vec::with_capacity(mesh.num_triangles());
        let mut grads = Vec::with_capacity(mesh.num_triangles());
        let mut lumped = vec![0.0; mesh.num_nodes()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let area = mesh.triangle_area(t);
            let mut g = [[0.0; 2]; 3];
            for k in 0..3 {
                let xj = nodes[tri[(k + 1) % 3]];
                let xk = nodes[tri[(k + 2) % 3]];
                g[k] = [(xj[1] - xk[1]) / (2.0 * area), (xk[0] - xj[0]) / (2.0 * area)];
            }
            for &i in tri {
                lumped[i] += area / 3.0;
            }
            areas.push(area);
            grads.push(g);
        }

        let interior: Vec<usize> = (0..mesh.num_nodes()).filter(|&i| !mesh.is_boundary(i)).collect();
        let mut local = vec![NO_DOF; mesh.num_nodes()];
        for (k, &i) in interior.iter().enumerate() {
            local[i] = k;
        }
        let mut adj = vec![Vec::new(); interior.len()];
        for tri in mesh.triangles() {
            for a in 0..3 {
                for b in 0..3 {
                    let (la, lb) = (local[tri[a]], local[tri[b]]);
                    if a != b && la != NO_DOF && lb != NO_DOF {
                        adj[la].push(lb);
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let order = if interior.is_empty() { Vec::new() } else { reverse_cuthill_mckee(&adj) };
        let mut new_of_local = vec![0; interior.len()];
        for (new, &old) in order.iter().enumerate() {
            new_of_local[old] = new;
        }
        let mut dof_of_node = vec![NO_DOF; mesh.num_nodes()];
        let mut node_of_dof = vec![0; interior.len()];
        for (l, &node) in interior.iter().enumerate() {
            dof_of_node[node] = new_of_local[l];
            node_of_dof[new_of_local[l]] = node;
        }
        let renumbered: Vec<Vec<usize>> = order
            .iter()
            .map(|&old| adj[old].iter().map(|&w| new_of_local[w]).collect())
            .collect();
        let pattern = Skyline::from_graph(&renumbered);
        FemSpace { areas, grads, lumped, dof_of_node, node_of_dof, pattern }
    }

    pub(crate) fn num_dofs(&self) -> usize {
        self.node_of_dof.len()
    }

    /// Constant gradient of the nodal field `v` on triangle `t`.
    #[inline]
    pub(crate) fn grad(&self, tri: &[usize; 3], t: usize, v: &[f64]) -> [f64; 2] {
        let g = &self.grads[t];
        [
            v[tri[0]] * g[0][0] + v[tri[1]] * g[1][0] + v[tri[2]] * g[2][0],
            v[tri[0]] * g[0][1] + v[tri[1]] * g[1][1] + v[tri[2]] * g[2][1],
        ]
    }
}
