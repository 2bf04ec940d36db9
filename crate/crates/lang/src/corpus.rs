//! Example programs shipped with the language.

pub const BUFFER: &str = include_str!("../corpus/buffer.itp");
pub const RING: &str = include_str!("../corpus/ring.itp");
pub const MISC: &str = include_str!("../corpus/misc.itp");

/// Every example with its file name.
pub const ALL: [(&str, &str); 3] = [("buffer.itp", BUFFER), ("ring.itp", RING), ("misc.itp", MISC)];
