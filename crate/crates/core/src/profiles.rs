//! Layer switching driven by a `(T_phi, T_nu)` profile.
//!
//! A patch whose context dynamic range is at most `T_phi` is filled by BRL.
//! Otherwise the support area grows ring by ring while the normalization
//! factor `nu` (the running sum of raw IDL weights) is accumulated; the first
//! time `nu >= T_nu` the patch is filled by IDL from the candidates gathered
//! so far. If the support runs out first, HQL runs on every candidate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    brl_estimate, hql_estimate_with, idl_estimate, idl_raw_weight, HqlConfig, Layer, PatchEstimate, DEFAULT_SIGMA2,
};
use crate::framework::{CandidateSet, ExpansionMap, TargetContext};
use crate::raster::{ImageBuffer, LossMask};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileName {
    Express,
    Efficient,
    Excellent,
    Custom,
    /// Thresholds that disable BRL and IDL, reducing switching to plain HQL.
    Kmmse,
}

impl ProfileName {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileName::Express => "express",
            ProfileName::Efficient => "efficient",
            ProfileName::Excellent => "excellent",
            ProfileName::Custom => "custom",
            ProfileName::Kmmse => "kmmse",
        }
    }
}

impl fmt::Display for ProfileName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub name: ProfileName,
    pub t_phi: f64,
    pub t_nu: f64,
}

impl Profile {
    pub const EXPRESS: Profile = Profile { name: ProfileName::Express, t_phi: 20.0, t_nu: 0.01 };
    pub const EFFICIENT: Profile = Profile { name: ProfileName::Efficient, t_phi: 20.0, t_nu: 0.1 };
    pub const EXCELLENT: Profile = Profile { name: ProfileName::Excellent, t_phi: 20.0, t_nu: 100.0 };
    /// `T_phi = -1`, `T_nu = +inf`: every patch goes to HQL.
    pub const KMMSE: Profile = Profile { name: ProfileName::Kmmse, t_phi: -1.0, t_nu: f64::INFINITY };

    pub const NAMED: [Profile; 3] = [Profile::EXPRESS, Profile::EFFICIENT, Profile::EXCELLENT];

    /// A user-defined profile; requires `t_phi >= 0` and `t_nu > 0`.
    pub fn custom(t_phi: f64, t_nu: f64) -> Result<Self> {
        if t_phi.is_nan() || t_phi < 0.0 || !t_phi.is_finite() || t_nu.is_nan() || t_nu <= 0.0 {
            return Err(Error::InvalidProfile { t_phi, t_nu });
        }
        Ok(Profile { name: ProfileName::Custom, t_phi, t_nu })
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "express" => Some(Self::EXPRESS),
            "efficient" => Some(Self::EFFICIENT),
            "excellent" => Some(Self::EXCELLENT),
            "kmmse" => Some(Self::KMMSE),
            _ => None,
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Profile::by_name(s).ok_or_else(|| format!("unknown profile `{s}` (expected express, efficient or excellent)"))
    }
}

/// The switching outcome for one patch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LayerDecision {
    pub layer: Layer,
    pub phi: f64,
    pub nu: f64,
    pub rings_used: usize,
    pub fallback: bool,
}

impl LayerDecision {
    /// Whether the decision is consistent with the profile thresholds.
    pub fn is_consistent_with(&self, profile: &Profile) -> bool {
        match self.layer {
            Layer::Brl => self.phi <= profile.t_phi || self.fallback,
            Layer::Idl => self.nu >= profile.t_nu || self.fallback,
            Layer::Hql => self.phi > profile.t_phi && self.nu < profile.t_nu,
        }
    }
}

/// Dynamic range `max(y0) - min(y0)` of the context.
pub fn flatness(target: &TargetContext) -> f64 {
    let (lo, hi) = target
        .y0()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// Runs the profile's layer tests for one patch and returns the estimate of
/// the selected layer together with the decision that led to it.
pub fn select_and_estimate(
    img: &ImageBuffer,
    mask: &LossMask,
    target: &TargetContext,
    map: &ExpansionMap,
    profile: &Profile,
) -> (PatchEstimate, LayerDecision) {
    select_with_sigma(img, mask, target, map, profile, DEFAULT_SIGMA2)
}

pub(crate) fn select_with_sigma(
    img: &ImageBuffer,
    mask: &LossMask,
    target: &TargetContext,
    map: &ExpansionMap,
    profile: &Profile,
    sigma2: f64,
) -> (PatchEstimate, LayerDecision) {
    let phi = flatness(target);
    if phi <= profile.t_phi {
        let mut estimate = brl_estimate(target).expect("target context is never empty");
        estimate.diagnostics.phi = Some(phi);
        let decision = LayerDecision { layer: Layer::Brl, phi, nu: 0.0, rings_used: 0, fallback: false };
        return (estimate, decision);
    }

    let y0 = target.y0();
    let mut set = CandidateSet::new(target, map);
    let mut nu = 0.0;
    while !set.is_exhausted() {
        let start = set.len();
        if set.expand(img, mask, target, map).is_err() {
            break;
        }
        nu += (start..set.len()).map(|j| idl_raw_weight(y0, set.y(j), sigma2)).sum::<f64>();
        if nu >= profile.t_nu {
            if let Ok(mut estimate) = idl_estimate(target, &set, sigma2) {
                estimate.diagnostics.phi = Some(phi);
                estimate.diagnostics.nu = Some(nu);
                let decision = LayerDecision { layer: Layer::Idl, phi, nu, rings_used: set.rings_used(), fallback: false };
                return (estimate, decision);
            }
        }
    }

    let config = HqlConfig { sigma2, ..HqlConfig::default() };
    let mut estimate = hql_estimate_with(target, &set, &config).expect("fallback ladder always yields an estimate");
    estimate.diagnostics.phi = Some(phi);
    let decision = LayerDecision {
        layer: estimate.layer,
        phi,
        nu,
        rings_used: set.rings_used(),
        fallback: estimate.diagnostics.fallback,
    };
    estimate.diagnostics.nu = Some(nu);
    (estimate, decision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{BlockGrid, BlockId};

    #[test]
    fn named_profiles() {
        assert_eq!((Profile::EXPRESS.t_phi, Profile::EXPRESS.t_nu), (20.0, 0.01));
        assert_eq!((Profile::EFFICIENT.t_phi, Profile::EFFICIENT.t_nu), (20.0, 0.1));
        assert_eq!((Profile::EXCELLENT.t_phi, Profile::EXCELLENT.t_nu), (20.0, 100.0));
        assert_eq!("Efficient".parse::<Profile>().unwrap(), Profile::EFFICIENT);
        assert!("fast".parse::<Profile>().is_err());
    }

    #[test]
    fn custom_profile_validation() {
        assert!(Profile::custom(10.0, 0.5).is_ok());
        assert!(Profile::custom(-1.0, 0.5).is_err());
        assert!(Profile::custom(10.0, 0.0).is_err());
        assert!(Profile::custom(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn flatness_range() {
        let t = TargetContext::from_context(vec![7.0; 9]).unwrap();
        assert_eq!(flatness(&t), 0.0);
        let t = TargetContext::from_context(vec![3.0, 255.0, 0.0, 100.0]).unwrap();
        assert_eq!(flatness(&t), 255.0);
        let t = TargetContext::from_context(vec![100.0, 0.0, 3.0, 255.0]).unwrap();
        assert_eq!(flatness(&t), 255.0);
    }

    #[test]
    fn flat_context_short_circuits() {
        let grid = BlockGrid::for_image(48, 48);
        let img = ImageBuffer::filled(48, 48, 40.0).unwrap();
        let mask = crate::pattern::gen_dispersed_mask(&grid);
        let target = crate::framework::extract_target(&img, &mask, (16, 16)).unwrap();
        let map = ExpansionMap::for_block(&grid, BlockId::new(1, 1), (16, 16));
        for profile in Profile::NAMED {
            let (e, d) = select_and_estimate(&img, &mask, &target, &map, &profile);
            assert_eq!(e.layer, Layer::Brl);
            assert_eq!(d.rings_used, 0);
            assert!(d.is_consistent_with(&profile));
        }
    }
}
