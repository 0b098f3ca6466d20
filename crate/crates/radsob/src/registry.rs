//! Name-keyed builders for warps and profiles.
//!
//! Every variant ships behind [`Warp`] or [`Profile`]; the registry turns a
//! JSON description into a boxed instance, so configuration files and the
//! command line select variants by the same names. New kinds register at
//! runtime without touching the parsers.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::manifold::{EuclideanWarp, GridWarp, HyperbolicWarp, ModelManifold, Warp};
use crate::manifold::expr::ExpressionWarp;
use crate::profiles::{AubinTalenti, GridProfile, Profile, TruncatedAT};

type WarpBuilder = Box<dyn Fn(&Value) -> Result<Arc<dyn Warp>> + Send + Sync>;
type ProfileBuilder = Box<dyn Fn(u32, &Value) -> Result<Arc<dyn Profile>> + Send + Sync>;

/// Builder maps keyed by kind name.
pub struct Registry {
    warps: BTreeMap<String, WarpBuilder>,
    profiles: BTreeMap<String, ProfileBuilder>,
}

fn missing(ctx: &str, key: &str) -> Error {
    Error::Spec(format!("{ctx}: missing key '{key}'"))
}

fn req_f64(obj: &Value, key: &str, ctx: &str) -> Result<f64> {
    obj.get(key)
        .ok_or_else(|| missing(ctx, key))?
        .as_f64()
        .ok_or_else(|| Error::Spec(format!("{ctx}: key '{key}' must be a number")))
}

fn req_u32(obj: &Value, key: &str, ctx: &str) -> Result<u32> {
    let v = obj.get(key).ok_or_else(|| missing(ctx, key))?;
    v.as_u64()
        .and_then(|u| u32::try_from(u).ok())
        .ok_or_else(|| Error::Spec(format!("{ctx}: key '{key}' must be a small nonnegative integer")))
}

fn req_str<'a>(obj: &'a Value, key: &str, ctx: &str) -> Result<&'a str> {
    obj.get(key)
        .ok_or_else(|| missing(ctx, key))?
        .as_str()
        .ok_or_else(|| Error::Spec(format!("{ctx}: key '{key}' must be a string")))
}

fn req_samples(obj: &Value, key: &str, ctx: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let arr = obj
        .get(key)
        .ok_or_else(|| missing(ctx, key))?
        .as_array()
        .ok_or_else(|| Error::Spec(format!("{ctx}: key '{key}' must be an array of [x, y] pairs")))?;
    let mut xs = Vec::with_capacity(arr.len());
    let mut ys = Vec::with_capacity(arr.len());
    for (i, item) in arr.iter().enumerate() {
        let pair = item
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| Error::Spec(format!("{ctx}: '{key}' entry {i} must be an [x, y] pair")))?;
        let x = pair[0]
            .as_f64()
            .ok_or_else(|| Error::Spec(format!("{ctx}: '{key}' entry {i} has a non-numeric x")))?;
        let y = pair[1]
            .as_f64()
            .ok_or_else(|| Error::Spec(format!("{ctx}: '{key}' entry {i} has a non-numeric y")))?;
        xs.push(x);
        ys.push(y);
    }
    Ok((xs, ys))
}

impl Registry {
    /// An empty registry with no kinds.
    pub fn new() -> Self {
        Registry {
            warps: BTreeMap::new(),
            profiles: BTreeMap::new(),
        }
    }

    /// The stock kinds: warps `euclidean`, `hyperbolic`, `grid`,
    /// `expression`; profiles `aubin_talenti`, `truncated`, `grid`.
    pub fn builtin() -> Self {
        let mut reg = Registry::new();
        reg.register_warp("euclidean", |_spec| {
            Ok(Arc::new(EuclideanWarp) as Arc<dyn Warp>)
        });
        reg.register_warp("hyperbolic", |spec| {
            let k = req_f64(spec, "k", "hyperbolic warp")?;
            Ok(Arc::new(HyperbolicWarp::new(k)?) as Arc<dyn Warp>)
        });
        reg.register_warp("grid", |spec| {
            let (rs, psis) = req_samples(spec, "samples", "grid warp")?;
            Ok(Arc::new(GridWarp::from_samples(&rs, &psis)?) as Arc<dyn Warp>)
        });
        reg.register_warp("expression", |spec| {
            let formula = req_str(spec, "formula", "expression warp")?;
            Ok(Arc::new(ExpressionWarp::parse(formula)?) as Arc<dyn Warp>)
        });

        reg.register_profile("aubin_talenti", |n, spec| {
            let b = req_f64(spec, "b", "aubin_talenti profile")?;
            Ok(Arc::new(AubinTalenti::new(n, b)?) as Arc<dyn Profile>)
        });
        reg.register_profile("truncated", |n, spec| {
            let b = req_f64(spec, "b", "truncated profile")?;
            let eps = req_f64(spec, "eps", "truncated profile")?;
            Ok(Arc::new(TruncatedAT::new(n, b, eps)?) as Arc<dyn Profile>)
        });
        reg.register_profile("truncated_at", |n, spec| {
            let b = req_f64(spec, "b", "truncated profile")?;
            let eps = req_f64(spec, "eps", "truncated profile")?;
            Ok(Arc::new(TruncatedAT::new(n, b, eps)?) as Arc<dyn Profile>)
        });
        reg.register_profile("grid", |_n, spec| {
            let (rs, fs) = req_samples(spec, "samples", "grid profile")?;
            Ok(Arc::new(GridProfile::from_samples(&rs, &fs)?) as Arc<dyn Profile>)
        });
        reg
    }

    /// Add or replace a warp kind.
    pub fn register_warp(
        &mut self,
        kind: &str,
        build: impl Fn(&Value) -> Result<Arc<dyn Warp>> + Send + Sync + 'static,
    ) {
        self.warps.insert(kind.to_string(), Box::new(build));
    }

    /// Add or replace a profile kind. The builder receives the dimension
    /// of the target manifold alongside the JSON spec.
    pub fn register_profile(
        &mut self,
        kind: &str,
        build: impl Fn(u32, &Value) -> Result<Arc<dyn Profile>> + Send + Sync + 'static,
    ) {
        self.profiles.insert(kind.to_string(), Box::new(build));
    }

    /// Registered warp kind names, sorted.
    pub fn warp_kinds(&self) -> Vec<&str> {
        self.warps.keys().map(String::as_str).collect()
    }

    /// Registered profile kind names, sorted.
    pub fn profile_kinds(&self) -> Vec<&str> {
        self.profiles.keys().map(String::as_str).collect()
    }

    /// Build a warp from `{"kind": ..., ...}`.
    pub fn build_warp(&self, spec: &Value) -> Result<Arc<dyn Warp>> {
        let kind = req_str(spec, "kind", "warp spec")?;
        let builder = self.warps.get(kind).ok_or_else(|| {
            Error::Spec(format!(
                "unknown warp kind '{kind}' (known: {})",
                self.warp_kinds().join(", ")
            ))
        })?;
        builder(spec)
    }

    /// Build a profile from `{"kind": ..., ...}` for a manifold of
    /// dimension `n`.
    pub fn build_profile(&self, n: u32, spec: &Value) -> Result<Arc<dyn Profile>> {
        let kind = req_str(spec, "kind", "profile spec")?;
        let builder = self.profiles.get(kind).ok_or_else(|| {
            Error::Spec(format!(
                "unknown profile kind '{kind}' (known: {})",
                self.profile_kinds().join(", ")
            ))
        })?;
        builder(n, spec)
    }

    /// Build a manifold from `{"n": ..., "warp": {...}, "label": ...}`.
    /// The label defaults to the warp kind when absent.
    pub fn manifold_from_json(&self, spec: &Value) -> Result<ModelManifold> {
        let n = req_u32(spec, "n", "manifold spec")?;
        let warp_spec = spec.get("warp").ok_or_else(|| missing("manifold spec", "warp"))?;
        let warp = self.build_warp(warp_spec)?;
        let label = match spec.get("label") {
            Some(v) => v
                .as_str()
                .ok_or_else(|| Error::Spec("manifold spec: key 'label' must be a string".into()))?
                .to_string(),
            None => warp.kind_name().to_string(),
        };
        ModelManifold::new(n, warp, label)
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::builtin()
    }
}
