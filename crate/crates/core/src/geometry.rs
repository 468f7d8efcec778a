//! Mapping between UE/stripe poses and per-link channel parameters.
//!
//! Each stripe is a ULA lying along its local x-axis; the boresight is the
//! local y-axis. `orientation` rotates the local frame about global z,
//! counter-clockwise from global x. The azimuth angle of arrival is
//! `pi/2 - atan2(p'_y, p'_x)` where `p'` is the UE position in the local frame,
//! so a UE straight ahead on boresight has AoA 0.

use crate::error::{Error, Result};
use crate::scalar::{wrap_phase, Real, SPEED_OF_LIGHT};

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

/// Known pose and array layout of one radio stripe.
#[derive(Debug, Clone, PartialEq)]
pub struct StripePose<T> {
    pub position: Vec3<T>,
    /// Rotation about z, radians, stored in `[-pi, pi)`.
    pub orientation: T,
    pub antenna_count: usize,
    /// Element spacing in meters.
    pub element_spacing: T,
}

impl<T: Real> StripePose<T> {
    pub fn new(position: Vec3<T>, orientation: T, antenna_count: usize, element_spacing: T) -> Result<Self> {
        if antenna_count == 0 {
            return Err(Error::Config("stripe needs at least one antenna".into()));
        }
        if !(element_spacing > T::zero()) {
            return Err(Error::Config("element spacing must be positive".into()));
        }
        Ok(Self {
            position,
            orientation: wrap_phase(orientation),
            antenna_count,
            element_spacing,
        })
    }
}

/// True UE state: position plus clock and phase offsets w.r.t. the network.
#[derive(Debug, Clone, PartialEq)]
pub struct UeState<T> {
    pub position: Vec3<T>,
    /// Seconds.
    pub clock_offset: T,
    /// Radians in `[-pi, pi)`.
    pub phase_offset: T,
}

impl<T: Real> UeState<T> {
    pub fn new(position: Vec3<T>, clock_offset: T, phase_offset: T) -> Self {
        Self {
            position,
            clock_offset,
            phase_offset: wrap_phase(phase_offset),
        }
    }

    pub fn position_2d(&self) -> [T; 2] {
        [self.position[0], self.position[1]]
    }
}

/// Channel parameters of one UE-stripe link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGeometry<T> {
    /// Propagation delay, seconds.
    pub delay: T,
    /// Delay plus UE clock offset, seconds.
    pub pseudo_delay: T,
    /// Azimuth AoA relative to the stripe boresight, radians.
    pub aoa: T,
    /// `-2 pi f_c delay + phase_offset`, wrapped to `[-pi, pi)`.
    pub carrier_phase: T,
    /// UE position in the stripe's local frame, meters.
    pub local_position: Vec3<T>,
}

/// Rotation by `beta` about the z-axis.
pub fn rotation_matrix<T: Real>(beta: T) -> Mat3<T> {
    let (s, c) = beta.sin_cos();
    let (z, o) = (T::zero(), T::one());
    [[c, -s, z], [s, c, z], [z, z, o]]
}

pub fn mat_vec<T: Real>(m: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    let mut out = [T::zero(); 3];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

pub fn transpose<T: Real>(m: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

pub fn norm3<T: Real>(v: &Vec3<T>) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn sub3<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// UE position expressed in the stripe's local frame.
pub fn local_position<T: Real>(ue_position: &Vec3<T>, stripe: &StripePose<T>) -> Vec3<T> {
    let r = sub3(ue_position, &stripe.position);
    // M(beta)^-1 = M(beta)^T
    mat_vec(&transpose(&rotation_matrix(stripe.orientation)), &r)
}

/// AoA from a local-frame position. Errors when the UE is horizontally
/// colocated with the stripe.
pub fn aoa_from_local<T: Real>(local: &Vec3<T>) -> Result<T> {
    if local[0] == T::zero() && local[1] == T::zero() {
        return Err(Error::Domain("AoA undefined: UE horizontally colocated with stripe".into()));
    }
    Ok(T::FRAC_PI_2() - local[1].atan2(local[0]))
}

/// Propagation delay, pseudo-delay, AoA, carrier phase and local position.
pub fn link_geometry<T: Real>(ue: &UeState<T>, stripe: &StripePose<T>, carrier_freq: T) -> Result<LinkGeometry<T>> {
    let c = T::lit(SPEED_OF_LIGHT);
    let r = sub3(&ue.position, &stripe.position);
    let range = norm3(&r);
    if !(range > T::zero()) {
        return Err(Error::Domain("zero range: UE colocated with stripe".into()));
    }
    let local = local_position(&ue.position, stripe);
    let aoa = aoa_from_local(&local)?;
    let delay = range / c;
    let carrier_phase = wrap_phase(-T::two_pi() * carrier_freq * delay + ue.phase_offset);
    Ok(LinkGeometry {
        delay,
        pseudo_delay: delay + ue.clock_offset,
        aoa,
        carrier_phase,
        local_position: local,
    })
}
