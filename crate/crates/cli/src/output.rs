use std::io;
use std::path::Path;

/// Write a complete output file. Content is materialized before the file is
/// touched, so error paths never leave a partial primary output behind.
pub fn write_file(path: &Path, content: &str) -> io::Result<()> {
    std::fs::write(path, content)
}

pub fn vector(v: &[u8]) -> String {
    let inner: Vec<String> = v.iter().map(|n| n.to_string()).collect();
    format!("({})", inner.join(", "))
}
