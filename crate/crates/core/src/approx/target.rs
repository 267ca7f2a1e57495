use super::Mlp;
use crate::error::{Error, Result};

/// Slow-moving copy of an online network, `w- <- (1 - zeta) w- + zeta w`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetNet {
    net: Mlp,
    zeta: f64,
}

impl TargetNet {
    pub fn new(online: &Mlp, zeta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&zeta) {
            return Err(Error::Domain(format!("blend factor must lie in [0, 1), got {zeta}")));
        }
        Ok(Self {
            net: online.clone(),
            zeta,
        })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn soft_update(&mut self, online: &Mlp) -> Result<()> {
        if online.sizes() != self.net.sizes() {
            return Err(Error::shape(
                format!("{:?}", self.net.sizes()),
                format!("{:?}", online.sizes()),
            ));
        }
        let z = self.zeta;
        for (t, w) in self.net.params_mut().iter_mut().zip(online.params()) {
            *t = (1.0 - z) * *t + z * w;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::OutputActivation;
    use crate::rng::seeded;

    fn constant(v: f64) -> Mlp {
        let n = crate::approx::parameter_count(&[2, 2]);
        Mlp::from_params(&[2, 2], OutputActivation::Identity, vec![v; n]).unwrap()
    }

    #[test]
    fn frozen_target() {
        let mut t = TargetNet::new(&constant(0.0), 0.0).unwrap();
        t.soft_update(&constant(2.0)).unwrap();
        assert!(t.net().params().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn midpoint_blend() {
        let mut t = TargetNet::new(&constant(0.0), 0.5).unwrap();
        t.soft_update(&constant(2.0)).unwrap();
        assert!(t.net().params().iter().all(|&p| p == 1.0));
    }

    #[test]
    fn near_one_copies() {
        assert!(TargetNet::new(&constant(0.0), 1.0).is_err());
        let mut t = TargetNet::new(&constant(0.0), 0.999_999).unwrap();
        t.soft_update(&constant(2.0)).unwrap();
        assert!(t.net().params().iter().all(|&p| (p - 2.0).abs() < 1e-5));
    }

    #[test]
    fn shape_mismatch() {
        let mut t = TargetNet::new(&constant(0.0), 0.1).unwrap();
        let other = Mlp::zeros(&[3, 2], OutputActivation::Identity).unwrap();
        assert!(t.soft_update(&other).is_err());
    }

    #[test]
    fn contraction_toward_online() {
        let mut rng = seeded(4);
        let online = Mlp::new(&[3, 4, 2], OutputActivation::Identity, &mut rng).unwrap();
        let start = Mlp::new(&[3, 4, 2], OutputActivation::Identity, &mut rng).unwrap();
        let zeta = 0.3;
        let mut t = TargetNet::new(&start, zeta).unwrap();
        t.soft_update(&online).unwrap();
        for ((new, old), w) in t.net().params().iter().zip(start.params()).zip(online.params()) {
            let lhs = (new - w).abs();
            let rhs = (1.0 - zeta) * (old - w).abs();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
