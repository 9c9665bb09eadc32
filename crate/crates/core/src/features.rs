//! Grammatical feature bundles such as `Case=Gen|Number=Plur`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureParseError {
    #[error("malformed feature pair `{0}` (expected Category=Value)")]
    Malformed(String),
    #[error("category `{0}` given more than once")]
    DuplicateCategory(String),
}

/// A set of category/value pairs with at most one value per category.
///
/// Equality is set equality; the textual form is `Cat=Val|Cat=Val` with
/// categories sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct FeatureBundle(BTreeMap<String, String>);

impl FeatureBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, FeatureParseError> {
        let mut bundle = BTreeMap::new();
        for pair in text.split('|').map(str::trim).filter(|p| !p.is_empty()) {
            let (cat, val) = pair
                .split_once('=')
                .map(|(c, v)| (c.trim(), v.trim()))
                .filter(|(c, v)| !c.is_empty() && !v.is_empty())
                .ok_or_else(|| FeatureParseError::Malformed(pair.to_string()))?;
            if bundle.insert(cat.to_string(), val.to_string()).is_some() {
                return Err(FeatureParseError::DuplicateCategory(cat.to_string()));
            }
        }
        Ok(Self(bundle))
    }

    pub fn get(&self, category: &str) -> Option<&str> {
        self.0.get(category).map(String::as_str)
    }

    pub fn set(&mut self, category: impl Into<String>, value: impl Into<String>) {
        self.0.insert(category.into(), value.into());
    }

    pub fn remove(&mut self, category: &str) -> Option<String> {
        self.0.remove(category)
    }

    pub fn with(mut self, category: impl Into<String>, value: impl Into<String>) -> Self {
        self.set(category, value);
        self
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(c, v)| (c.as_str(), v.as_str()))
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// True when every pair of `other` is also in `self`.
    pub fn contains(&self, other: &FeatureBundle) -> bool {
        other.iter().all(|(c, v)| self.get(c) == Some(v))
    }

    /// True when the bundles agree on every category in `categories` that both carry.
    pub fn agrees_with<'a>(
        &self,
        other: &FeatureBundle,
        categories: impl IntoIterator<Item = &'a String>,
    ) -> bool {
        categories
            .into_iter()
            .all(|c| match (self.get(c), other.get(c)) {
                (Some(a), Some(b)) => a == b,
                _ => true,
            })
    }

    /// Union where `overrides` wins on shared categories.
    pub fn merged(&self, overrides: &FeatureBundle) -> FeatureBundle {
        let mut out = self.clone();
        for (c, v) in overrides.iter() {
            out.set(c, v);
        }
        out
    }
}

impl fmt::Display for FeatureBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, v) in self.iter() {
            if !first {
                f.write_str("|")?;
            }
            first = false;
            write!(f, "{c}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for FeatureBundle {
    type Err = FeatureParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl<const N: usize> From<[(&str, &str); N]> for FeatureBundle {
    fn from(pairs: [(&str, &str); N]) -> Self {
        Self(
            pairs
                .into_iter()
                .map(|(c, v)| (c.to_string(), v.to_string()))
                .collect(),
        )
    }
}

// Accepts either the compact string notation or a plain map.
impl<'de> Deserialize<'de> for FeatureBundle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct BundleVisitor;

        impl<'de> Visitor<'de> for BundleVisitor {
            type Value = FeatureBundle;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a `Cat=Val|Cat=Val` string or a map of categories to values")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<FeatureBundle, E> {
                FeatureBundle::parse(v).map_err(E::custom)
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<FeatureBundle, A::Error> {
                let mut out = BTreeMap::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    out.insert(k, v);
                }
                Ok(FeatureBundle(out))
            }
        }

        deserializer.deserialize_any(BundleVisitor)
    }
}
