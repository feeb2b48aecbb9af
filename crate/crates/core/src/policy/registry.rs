use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{FixedAction, MvnThompson, Policy, ScalarizedThompson};
use crate::error::{Error, Result};
use crate::objective::ActionSet;
use crate::preference::{gap_table, Preference};

/// `{"policy": "<name>", "label": "...", ...parameters}` as written in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub policy: String,
    /// Name used in outputs; defaults to `policy`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(flatten)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl PolicySpec {
    pub fn named(policy: impl Into<String>) -> Self {
        Self {
            policy: policy.into(),
            label: None,
            params: Default::default(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| match self.params.get("action") {
            Some(a) if self.policy == "fixed" => format!("fixed_{a}"),
            _ => self.policy.clone(),
        })
    }

    pub fn usize_param(&self, key: &str) -> Result<usize> {
        self.params
            .get(key)
            .and_then(serde_json::Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| Error::config(format!("policy `{}` needs integer parameter `{key}`", self.policy)))
    }
}

/// What a factory may look at when building a policy for one run.
#[derive(Debug, Clone, Copy)]
pub struct PolicyContext<'a> {
    pub actions: &'a ActionSet,
    pub preference: &'a Preference,
}

pub trait PolicyFactory: Send + Sync {
    fn build(&self, spec: &PolicySpec, ctx: &PolicyContext<'_>) -> Result<Box<dyn Policy>>;
}

impl<F> PolicyFactory for F
where
    F: Fn(&PolicySpec, &PolicyContext<'_>) -> Result<Box<dyn Policy>> + Send + Sync,
{
    fn build(&self, spec: &PolicySpec, ctx: &PolicyContext<'_>) -> Result<Box<dyn Policy>> {
        self(spec, ctx)
    }
}

pub struct PolicyRegistry {
    factories: BTreeMap<String, Box<dyn PolicyFactory>>,
}

impl fmt::Debug for PolicyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolicyRegistry")
            .field("policies", &self.factories.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Default for PolicyRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

impl PolicyRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("mvn_ts", |_: &PolicySpec, ctx: &PolicyContext<'_>| {
            Ok(Box::new(MvnThompson::new(ctx.actions.len(), ctx.preference.clone())) as Box<dyn Policy>)
        });
        r.register("scalarized_gaussian_ts", |_: &PolicySpec, ctx: &PolicyContext<'_>| {
            Ok(Box::new(ScalarizedThompson::new(ctx.actions.len(), ctx.preference.clone())) as Box<dyn Policy>)
        });
        r.register("fixed", |spec: &PolicySpec, ctx: &PolicyContext<'_>| {
            let action = spec.usize_param("action")?;
            ctx.actions.check_index(action)?;
            Ok(Box::new(FixedAction::new(action)) as Box<dyn Policy>)
        });
        r.register("oracle", |_: &PolicySpec, ctx: &PolicyContext<'_>| {
            let star = gap_table(ctx.preference, ctx.actions)?.star();
            Ok(Box::new(FixedAction::oracle(star)) as Box<dyn Policy>)
        });
        r
    }

    /// Adds or replaces a factory.
    pub fn register(&mut self, name: impl Into<String>, factory: impl PolicyFactory + 'static) {
        self.factories.insert(name.into(), Box::new(factory));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, spec: &PolicySpec, ctx: &PolicyContext<'_>) -> Result<Box<dyn Policy>> {
        let factory = self.factories.get(&spec.policy).ok_or_else(|| Error::Unknown {
            kind: "policy",
            name: spec.policy.clone(),
        })?;
        factory.build(spec, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::ObjectiveVector;
    use crate::rng::{EpisodeDraws, NoiseStream};

    #[test]
    fn builds_defaults_by_name() {
        let actions = ActionSet::from_means([vec![0.2, 0.3], vec![0.9, 0.9]]).unwrap();
        let preference = Preference::linear(vec![0.5, 0.5]).unwrap();
        let ctx = PolicyContext {
            actions: &actions,
            preference: &preference,
        };
        let r = PolicyRegistry::with_defaults();
        assert_eq!(
            r.names().collect::<Vec<_>>(),
            ["fixed", "mvn_ts", "oracle", "scalarized_gaussian_ts"]
        );
        let mut draws = EpisodeDraws::new(NoiseStream::new(0, 0), 1);
        let mut oracle = r.build(&PolicySpec::named("oracle"), &ctx).unwrap();
        assert_eq!(oracle.select(&mut draws).unwrap(), 1);
        let mut fixed = r.build(&PolicySpec::named("fixed").with_param("action", 0), &ctx).unwrap();
        assert_eq!(fixed.select(&mut draws).unwrap(), 0);
        assert!(r.build(&PolicySpec::named("fixed"), &ctx).is_err());
        assert!(r.build(&PolicySpec::named("fixed").with_param("action", 5), &ctx).is_err());
        assert!(matches!(r.build(&PolicySpec::named("ucb"), &ctx), Err(Error::Unknown { .. })));
    }

    #[test]
    fn custom_registration() {
        struct Last(usize);
        impl Policy for Last {
            fn name(&self) -> &str {
                "last"
            }
            fn select(&mut self, _: &mut dyn crate::rng::DrawSource) -> Result<usize> {
                Ok(self.0)
            }
            fn observe(&mut self, _: usize, _: &ObjectiveVector) -> Result<()> {
                Ok(())
            }
        }
        let mut r = PolicyRegistry::empty();
        r.register("last", |_: &PolicySpec, ctx: &PolicyContext<'_>| {
            Ok(Box::new(Last(ctx.actions.len() - 1)) as Box<dyn Policy>)
        });
        let actions = ActionSet::from_means([vec![0.2], vec![0.3], vec![0.4]]).unwrap();
        let preference = Preference::linear(vec![1.0]).unwrap();
        let ctx = PolicyContext {
            actions: &actions,
            preference: &preference,
        };
        let mut p = r.build(&PolicySpec::named("last"), &ctx).unwrap();
        assert_eq!(p.select(&mut EpisodeDraws::new(NoiseStream::new(0, 0), 1)).unwrap(), 2);
    }

    #[test]
    fn spec_json_and_labels() {
        let spec: PolicySpec = serde_json::from_str(r#"{"policy":"fixed","action":3}"#).unwrap();
        assert_eq!(spec.usize_param("action").unwrap(), 3);
        assert_eq!(spec.label(), "fixed_3");
        let spec: PolicySpec = serde_json::from_str(r#"{"policy":"mvn_ts","label":"ts"}"#).unwrap();
        assert_eq!(spec.label(), "ts");
    }
}
