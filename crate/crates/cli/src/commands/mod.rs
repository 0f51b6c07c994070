mod dataset;
mod eval;
mod render;
mod train;

use std::path::Path;

pub use dataset::make_dataset;
pub use eval::eval;
pub use render::render;
pub use train::train;

/// Flags shared by every subcommand.
pub struct Context {
    pub seed: u64,
    pub verbose: bool,
}

impl Context {
    pub fn progress(&self, msg: impl FnOnce() -> String) {
        if self.verbose {
            eprintln!("{}", msg());
        }
    }
}

/// Directory that relative paths inside `file` resolve against.
fn base_dir(file: &Path) -> &Path {
    file.parent().unwrap_or(Path::new("."))
}
