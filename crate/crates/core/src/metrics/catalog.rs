use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

const BUNDLED: &str = include_str!("../../data/android_catalog.tsv");

/// Which Android feature a catalog class contributes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AndroidKind {
    Activity,
    View,
    BroadcastReceiver,
    Service,
    ContentProvider,
    Fragment,
    /// Part of the Android API but none of the above.
    Other,
}

impl AndroidKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "activity" => Self::Activity,
            "view" => Self::View,
            "broadcast_receiver" => Self::BroadcastReceiver,
            "service" => Self::Service,
            "content_provider" => Self::ContentProvider,
            "fragment" => Self::Fragment,
            "android" => Self::Other,
            _ => return None,
        })
    }

    pub fn is_building_block(self) -> bool {
        matches!(
            self,
            Self::Activity | Self::Service | Self::BroadcastReceiver | Self::ContentProvider
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("catalog line {0}: expected `feature<TAB>SimpleName`")]
    BadLine(usize),
    #[error("catalog line {line}: unknown feature `{feature}`")]
    UnknownFeature { line: usize, feature: String },
}

/// Simple names of Android API classes, grouped by feature.
///
/// Text format: one `feature<TAB>SimpleName` per line; `#` starts a comment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AndroidCatalog {
    names: BTreeMap<String, BTreeSet<AndroidKind>>,
}

impl Default for AndroidCatalog {
    fn default() -> Self {
        Self::parse(BUNDLED).expect("bundled catalog is well-formed")
    }
}

impl AndroidCatalog {
    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let mut names: BTreeMap<String, BTreeSet<AndroidKind>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (feature, name) = line.split_once('\t').ok_or(CatalogError::BadLine(i + 1))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(CatalogError::BadLine(i + 1));
            }
            let kind = AndroidKind::parse(feature.trim()).ok_or_else(|| CatalogError::UnknownFeature {
                line: i + 1,
                feature: feature.to_string(),
            })?;
            names.entry(name.to_string()).or_default().insert(kind);
        }
        Ok(Self { names })
    }

    pub fn contains(&self, simple_name: &str) -> bool {
        self.names.contains_key(simple_name)
    }

    pub fn kinds(&self, simple_name: &str) -> impl Iterator<Item = AndroidKind> + '_ {
        self.names.get(simple_name).into_iter().flatten().copied()
    }
}

pub fn has_android_prefix(qualified: &str) -> bool {
    qualified.starts_with("android.") || qualified.starts_with("androidx.")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalog_covers_each_feature() {
        let c = AndroidCatalog::default();
        assert!(c.kinds("AppCompatActivity").any(|k| k == AndroidKind::Activity));
        assert!(c.kinds("LinearLayout").any(|k| k == AndroidKind::View));
        assert!(c.kinds("AppWidgetProvider").any(|k| k == AndroidKind::BroadcastReceiver));
        assert!(c.kinds("IntentService").any(|k| k == AndroidKind::Service));
        assert!(c.kinds("ContentProvider").any(|k| k == AndroidKind::ContentProvider));
        assert!(c.kinds("DialogFragment").any(|k| k == AndroidKind::Fragment));
        assert!(c.contains("Bundle"));
        assert!(!c.contains("Object"));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(AndroidCatalog::parse("activity Foo"), Err(CatalogError::BadLine(1)));
        assert!(matches!(
            AndroidCatalog::parse("# c\nwidget\tFoo"),
            Err(CatalogError::UnknownFeature { line: 2, .. })
        ));
    }

    #[test]
    fn prefix_rule() {
        assert!(has_android_prefix("android.os.Bundle"));
        assert!(has_android_prefix("androidx.fragment.app.Fragment"));
        assert!(!has_android_prefix("androidish.Foo"));
    }
}
