use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::int::{encode_tiling, IntError, TilingVariant};
use crate::kripke::{Checker, Mode, Model, Program};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tile {
    pub name: String,
    pub left: String,
    pub right: String,
    pub up: String,
    pub down: String,
}

impl Tile {
    pub fn new(name: &str, left: &str, right: &str, up: &str, down: &str) -> Tile {
        Tile {
            name: name.into(),
            left: left.into(),
            right: right.into(),
            up: up.into(),
            down: down.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileSet {
    pub tiles: Vec<Tile>,
}

#[derive(Debug, Error)]
pub enum TilingError {
    #[error("tile set is empty")]
    Empty,
    #[error("duplicate tile name {0}")]
    DuplicateName(String),
    #[error("tile name {0:?} is not an identifier")]
    BadName(String),
    #[error("cell ({i},{j}) names unknown tile {name}")]
    UnknownTile { i: usize, j: usize, name: String },
    #[error("tiling has {found} cells, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error("search budget of {0} nodes exceeded")]
    Budget(u64),
    #[error("width and height must be positive")]
    ZeroPeriod,
    #[error("torus countermodel failed verification: {0}")]
    Verification(String),
    #[error(transparent)]
    Encode(#[from] IntError),
    #[error("malformed tile JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl TileSet {
    pub fn new(tiles: Vec<Tile>) -> Result<TileSet, TilingError> {
        let t = TileSet { tiles };
        t.check()?;
        Ok(t)
    }

    pub fn from_json(text: &str) -> Result<TileSet, TilingError> {
        let t: TileSet = serde_json::from_str(text)?;
        t.check()?;
        Ok(t)
    }

    /// Names distinct, nonempty, and usable inside letter names.
    pub fn check(&self) -> Result<(), TilingError> {
        if self.tiles.is_empty() {
            return Err(TilingError::Empty);
        }
        let mut seen = BTreeSet::new();
        for t in &self.tiles {
            let ok = !t.name.is_empty()
                && t.name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(TilingError::BadName(t.name.clone()));
            }
            if !seen.insert(&t.name) {
                return Err(TilingError::DuplicateName(t.name.clone()));
            }
        }
        Ok(())
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.tiles.iter().position(|t| t.name == name)
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }
}

/// A finite assignment of tiles to grid cells; `cells[j][i]` is the tile at
/// column `i`, row `j`, with row `j + 1` above row `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tiling {
    pub width: usize,
    pub height: usize,
    pub torus: bool,
    pub cells: Vec<Vec<String>>,
}

impl Tiling {
    pub fn at(&self, i: usize, j: usize) -> &str {
        &self.cells[j][i]
    }

    /// The `k*width` by `l*height` grid obtained by repeating the pattern.
    pub fn unfold(&self, k: usize, l: usize) -> Tiling {
        let cells = (0..self.height * l)
            .map(|j| {
                (0..self.width * k)
                    .map(|i| self.at(i % self.width, j % self.height).to_string())
                    .collect()
            })
            .collect();
        Tiling {
            width: self.width * k,
            height: self.height * l,
            torus: false,
            cells,
        }
    }
}

fn resolve(t: &TileSet, tau: &Tiling) -> Result<Vec<Vec<usize>>, TilingError> {
    if tau.width == 0 || tau.height == 0 {
        return Err(TilingError::ZeroPeriod);
    }
    let found: usize = tau.cells.iter().map(Vec::len).sum();
    if tau.cells.len() != tau.height || tau.cells.iter().any(|r| r.len() != tau.width) {
        return Err(TilingError::Shape {
            expected: tau.width * tau.height,
            found,
        });
    }
    let mut out = vec![vec![0; tau.width]; tau.height];
    for j in 0..tau.height {
        for i in 0..tau.width {
            let name = tau.at(i, j);
            out[j][i] = t.index(name).ok_or_else(|| TilingError::UnknownTile {
                i,
                j,
                name: name.to_string(),
            })?;
        }
    }
    Ok(out)
}

/// Both adjacency families hold, wrapping around iff the tiling is a torus.
pub fn check_tiling(t: &TileSet, tau: &Tiling) -> Result<bool, TilingError> {
    let g = resolve(t, tau)?;
    let (w, h) = (tau.width, tau.height);
    for j in 0..h {
        for i in 0..w {
            let here = &t.tiles[g[j][i]];
            if i + 1 < w || tau.torus {
                let right = &t.tiles[g[j][(i + 1) % w]];
                if here.right != right.left {
                    return Ok(false);
                }
            }
            if j + 1 < h || tau.torus {
                let above = &t.tiles[g[(j + 1) % h][i]];
                if here.up != above.down {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// First valid `width` x `height` torus tiling in row-major lexicographic
/// order of tile indices, if any.
pub fn find_periodic_tiling(
    t: &TileSet,
    width: usize,
    height: usize,
    budget: u64,
) -> Result<Option<Tiling>, TilingError> {
    t.check()?;
    if width == 0 || height == 0 {
        return Err(TilingError::ZeroPeriod);
    }
    let n = width * height;
    let mut grid = vec![0usize; n];
    let mut nodes = 0u64;
    fn fits(t: &TileSet, grid: &[usize], w: usize, h: usize, at: usize, cand: usize) -> bool {
        let (i, j) = (at % w, at / w);
        let c = &t.tiles[cand];
        if i > 0 && t.tiles[grid[at - 1]].right != c.left {
            return false;
        }
        if i == w - 1 && c.right != t.tiles[grid[j * w]].left && i > 0 {
            return false;
        }
        if w == 1 && c.right != c.left {
            return false;
        }
        if j > 0 && t.tiles[grid[at - w]].up != c.down {
            return false;
        }
        if j == h - 1 {
            let bottom = if h == 1 { c } else { &t.tiles[grid[i]] };
            if c.up != bottom.down {
                return false;
            }
        }
        true
    }
    fn go(
        t: &TileSet,
        grid: &mut [usize],
        w: usize,
        h: usize,
        at: usize,
        nodes: &mut u64,
        budget: u64,
    ) -> Result<bool, TilingError> {
        if at == grid.len() {
            return Ok(true);
        }
        for cand in 0..t.len() {
            *nodes += 1;
            if *nodes > budget {
                return Err(TilingError::Budget(budget));
            }
            if fits(t, grid, w, h, at, cand) {
                grid[at] = cand;
                if go(t, grid, w, h, at + 1, nodes, budget)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
    if !go(t, &mut grid, width, height, 0, &mut nodes, budget)? {
        return Ok(None);
    }
    let cells = (0..height)
        .map(|j| {
            (0..width)
                .map(|i| t.tiles[grid[j * width + i]].name.clone())
                .collect()
        })
        .collect();
    let tau = Tiling {
        width,
        height,
        torus: true,
        cells,
    };
    debug_assert!(check_tiling(t, &tau).unwrap());
    Ok(Some(tau))
}

/// A finite intuitionistic model refuting the positive tiling formula at
/// its root. The domain is the set of torus cells; `H`, `V` are torus
/// adjacency and `P_t` follows the tiling at every world. Above the root
/// sits one world per cell, where `D` holds of that cell only and `p` is
/// true; `q` is false everywhere. The model is checked before it is
/// returned.
pub fn torus_countermodel(t: &TileSet, tau: &Tiling) -> Result<Model, TilingError> {
    if !tau.torus || !check_tiling(t, tau)? {
        return Err(TilingError::Verification(
            "input is not a valid torus tiling".into(),
        ));
    }
    let enc = encode_tiling(t, TilingVariant::Int)?;
    let names = &enc.letters;
    let (w, h) = (tau.width, tau.height);
    let cell = |i: usize, j: usize| format!("c{i}_{j}");
    let mut m = Model::new(Mode::Intuitionistic);
    let mut ids = vec![vec![0; w]; h];
    for (j, row) in ids.iter_mut().enumerate() {
        for (i, id) in row.iter_mut().enumerate() {
            *id = m.add_individual(&cell(i, j));
        }
    }
    let root = m.add_world("root");
    let mut worlds = vec![root];
    for j in 0..h {
        for i in 0..w {
            worlds.push(m.add_world(&format!("u_{}", cell(i, j))));
        }
    }
    m.declare_letter(&names.h, 2).expect("fresh model");
    m.declare_letter(&names.v, 2).expect("fresh model");
    m.declare_letter(&names.d, 1).expect("fresh model");
    for &u in &worlds {
        m.set_domain(u, ids.iter().flatten().copied());
        m.add_edge(u, u);
        if u != root {
            m.add_edge(root, u);
        }
        for j in 0..h {
            for i in 0..w {
                let c = ids[j][i];
                m.add_fact(u, &names.h, vec![c, ids[j][(i + 1) % w]])
                    .expect("binary");
                m.add_fact(u, &names.v, vec![c, ids[(j + 1) % h][i]])
                    .expect("binary");
                let tile = t.index(tau.at(i, j)).expect("checked");
                m.add_fact(u, &names.tiles[tile], vec![c]).expect("unary");
            }
        }
    }
    m.declare_letter(&names.p, 0).expect("fresh");
    m.declare_letter(&names.q, 0).expect("fresh");
    for j in 0..h {
        for i in 0..w {
            let u = worlds[1 + j * w + i];
            m.add_fact(u, &names.d, vec![ids[j][i]]).expect("unary");
            m.add_fact(u, &names.p, vec![]).expect("0-ary");
        }
    }
    let problems = m.validate();
    if !problems.is_empty() {
        return Err(TilingError::Verification(format!(
            "invalid model: {}",
            problems[0]
        )));
    }
    for (label, conjunct) in &enc.conjuncts {
        let prog = Program::compile(conjunct, Mode::Intuitionistic)
            .map_err(|e| TilingError::Verification(e.to_string()))?;
        let mut c =
            Checker::new(&prog, &m).map_err(|e| TilingError::Verification(e.to_string()))?;
        if !c
            .sat_at(root)
            .map_err(|e| TilingError::Verification(e.to_string()))?
        {
            return Err(TilingError::Verification(format!(
                "conjunct {label} fails at the root"
            )));
        }
    }
    let prog = Program::compile(&enc.phi, Mode::Intuitionistic)
        .map_err(|e| TilingError::Verification(e.to_string()))?;
    let mut c = Checker::new(&prog, &m).map_err(|e| TilingError::Verification(e.to_string()))?;
    if c.sat_at(root)
        .map_err(|e| TilingError::Verification(e.to_string()))?
    {
        return Err(TilingError::Verification(
            "the tiling formula holds at the root".into(),
        ));
    }
    Ok(m)
}
