//! The Java sources of one project version.

use crate::metrics::lexer::lex_lossy;
use crate::metrics::parser::parse_structure;
use crate::miner::GitError;
use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProjectSnapshot {
    /// Repository-relative, forward-slash path to source text.
    pub files: BTreeMap<String, String>,
}

impl ProjectSnapshot {
    pub fn from_files<I, P, S>(files: I) -> Self
    where
        I: IntoIterator<Item = (P, S)>,
        P: Into<String>,
        S: Into<String>,
    {
        Self {
            files: files.into_iter().map(|(p, s)| (p.into(), s.into())).collect(),
        }
    }

    /// Loads every `.java` file below `root`. Invalid UTF-8 is replaced.
    pub fn from_dir(root: &Path) -> io::Result<Self> {
        let mut files = BTreeMap::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            for entry in std::fs::read_dir(&dir)? {
                let path = entry?.path();
                if path.is_dir() {
                    stack.push(path);
                } else if path.extension().is_some_and(|e| e == "java") {
                    let rel = path
                        .strip_prefix(root)
                        .expect("walked below root")
                        .components()
                        .map(|c| c.as_os_str().to_string_lossy())
                        .collect::<Vec<_>>()
                        .join("/");
                    let bytes = std::fs::read(&path)?;
                    files.insert(rel, String::from_utf8_lossy(&bytes).into_owned());
                }
            }
        }
        Ok(Self { files })
    }

    /// Reads the `.java` files of the parent of commit `sha` straight from
    /// the object database.
    pub fn from_git_parent(repo: &Path, sha: &str) -> Result<Self, GitError> {
        use crate::miner::git_run;
        let parent = format!("{sha}^");
        let listing = git_run(repo, &["ls-tree", "-r", "--name-only", &parent])?;
        let mut files = BTreeMap::new();
        for path in String::from_utf8_lossy(&listing).lines().filter(|p| p.ends_with(".java")) {
            let blob = git_run(repo, &["show", &format!("{parent}:{path}")])?;
            files.insert(path.to_string(), String::from_utf8_lossy(&blob).into_owned());
        }
        Ok(Self { files })
    }

    pub fn index(&self) -> TypeIndex {
        TypeIndex::build(self)
    }
}

/// Named types declared anywhere in a snapshot, by simple name.
#[derive(Debug, Clone, Default)]
pub struct TypeIndex {
    superclass: BTreeMap<String, Option<String>>,
}

impl TypeIndex {
    pub fn build(snapshot: &ProjectSnapshot) -> Self {
        let mut superclass = BTreeMap::new();
        for source in snapshot.files.values() {
            let (tokens, _) = lex_lossy(source);
            let model = parse_structure(&tokens);
            for t in model.types.iter().filter(|t| !t.is_anonymous) {
                // Files are visited in path order; the first declaration wins.
                superclass.entry(t.name.clone()).or_insert_with(|| t.extends_name.clone());
            }
        }
        Self { superclass }
    }

    pub fn contains(&self, simple_name: &str) -> bool {
        self.superclass.contains_key(simple_name)
    }

    /// `None` when the type is unknown; `Some(None)` when it extends nothing.
    pub fn superclass_of(&self, simple_name: &str) -> Option<Option<&str>> {
        self.superclass.get(simple_name).map(|s| s.as_deref())
    }

    pub fn names(&self) -> BTreeSet<&str> {
        self.superclass.keys().map(String::as_str).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_records_superclasses() {
        let snap = ProjectSnapshot::from_files([
            ("a/Base.java", "abstract class Base extends AppCompatActivity { static class Inner {} }"),
            ("a/Main.java", "class Main extends Base {}"),
        ]);
        let idx = snap.index();
        assert_eq!(idx.superclass_of("Main"), Some(Some("Base")));
        assert_eq!(idx.superclass_of("Base"), Some(Some("AppCompatActivity")));
        assert_eq!(idx.superclass_of("Inner"), Some(None));
        assert_eq!(idx.superclass_of("Missing"), None);
    }

    #[test]
    fn loads_java_files_from_directory() {
        let dir = std::env::temp_dir().join(format!("migrank-snap-{}", std::process::id()));
        std::fs::create_dir_all(dir.join("src/x")).unwrap();
        std::fs::write(dir.join("src/x/A.java"), "class A {}").unwrap();
        std::fs::write(dir.join("src/x/B.kt"), "class B").unwrap();
        let snap = ProjectSnapshot::from_dir(&dir).unwrap();
        std::fs::remove_dir_all(&dir).unwrap();
        assert_eq!(snap.files.keys().collect::<Vec<_>>(), vec!["src/x/A.java"]);
    }
}
