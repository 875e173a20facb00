use nalgebra::{Matrix2, Matrix2x3, Matrix3, SymmetricEigen, Vector2};

use super::{ArmParams, Joints, Pose2};

/// End-points of the three links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPoses {
    pub elbow: Pose2,
    pub wrist: Pose2,
    pub hand: Pose2,
}

impl LinkPoses {
    pub fn get(&self, link: usize) -> Pose2 {
        match link {
            0 => self.elbow,
            1 => self.wrist,
            2 => self.hand,
            _ => panic!("link index {link} out of range"),
        }
    }
}

/// Serial-chain composition. All angles zero stretches the chain along +x.
pub fn forward_kinematics(params: &ArmParams, q: &Joints) -> LinkPoses {
    let [l1, l2, l3] = params.link_lengths;
    let a1 = q[0];
    let a2 = a1 + q[1];
    let a3 = a2 + q[2];
    let elbow = Pose2::new(l1 * a1.cos(), l1 * a1.sin(), a1);
    let wrist = Pose2::new(elbow.x + l2 * a2.cos(), elbow.y + l2 * a2.sin(), a2);
    let off = params.hand_tip_offset;
    let hand = Pose2::new(
        wrist.x + l3 * a3.cos() - off * a3.sin(),
        wrist.y + l3 * a3.sin() + off * a3.cos(),
        a3,
    );
    LinkPoses { elbow, wrist, hand }
}

/// Geometric Jacobian of the hand: rows are (x_dot, y_dot, phi_dot).
pub fn geometric_jacobian(params: &ArmParams, q: &Joints) -> Matrix3<f64> {
    link_jacobian(params, q, 2)
}

/// Geometric Jacobian of the distal end-point of `link` (0 = elbow,
/// 1 = wrist, 2 = hand). Columns of joints distal to the link are zero.
pub fn link_jacobian(params: &ArmParams, q: &Joints, link: usize) -> Matrix3<f64> {
    let poses = forward_kinematics(params, q);
    let p = poses.get(link);
    // joint origins: shoulder at the base, then elbow, wrist
    let origins = [(0.0, 0.0), (poses.elbow.x, poses.elbow.y), (poses.wrist.x, poses.wrist.y)];
    let mut j = Matrix3::zeros();
    for (col, (ox, oy)) in origins.iter().enumerate().take(link + 1) {
        j[(0, col)] = -(p.y - oy);
        j[(1, col)] = p.x - ox;
        j[(2, col)] = 1.0;
    }
    j
}

pub fn translational_jacobian(params: &ArmParams, q: &Joints) -> Matrix2x3<f64> {
    geometric_jacobian(params, q).fixed_rows::<2>(0).into_owned()
}

/// Translational velocity ellipsoid of the hand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    /// Semi-axis lengths, largest first.
    pub axes: [f64; 2],
    /// Unit direction of each semi-axis.
    pub directions: [[f64; 2]; 2],
    /// Set when the smallest eigenvalue of J Jᵀ is below 1e-12.
    pub degenerate: bool,
}

impl Ellipsoid {
    pub fn major_angle(&self) -> f64 {
        self.directions[0][1].atan2(self.directions[0][0])
    }

    /// Length of the ellipsoid's support along a unit direction,
    /// `sqrt(uᵀ J Jᵀ u)`.
    pub fn directional_extent(&self, u: [f64; 2]) -> f64 {
        let mut s = 0.0;
        for k in 0..2 {
            let proj = self.directions[k][0] * u[0] + self.directions[k][1] * u[1];
            s += (self.axes[k] * proj).powi(2);
        }
        s.sqrt()
    }
}

pub const DEGENERATE_EIGENVALUE: f64 = 1e-12;

pub fn manipulability_ellipsoid(params: &ArmParams, q: &Joints) -> Ellipsoid {
    let jv = translational_jacobian(params, q);
    let jjt: Matrix2<f64> = jv * jv.transpose();
    let eig = SymmetricEigen::new(jjt);
    let (hi, lo) = if eig.eigenvalues[0] >= eig.eigenvalues[1] {
        (0, 1)
    } else {
        (1, 0)
    };
    let dir = |k: usize| -> [f64; 2] {
        let v: Vector2<f64> = eig.eigenvectors.column(k).normalize();
        // fixed sign so the output is deterministic under tiny perturbations
        if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
            [-v[0], -v[1]]
        } else {
            [v[0], v[1]]
        }
    };
    let lam_hi = eig.eigenvalues[hi].max(0.0);
    let lam_lo = eig.eigenvalues[lo].max(0.0);
    Ellipsoid {
        axes: [lam_hi.sqrt(), lam_lo.sqrt()],
        directions: [dir(hi), dir(lo)],
        degenerate: eig.eigenvalues[lo] < DEGENERATE_EIGENVALUE,
    }
}
