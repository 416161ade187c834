use std::fmt::Write as _;
use std::path::Path;

use crate::geometry::Vec2;

use super::WorldError;

/// Integer cell coordinate `(ix, iy)`; `iy` grows with world `y`.
pub type Cell = (i64, i64);

/// Binary occupancy grid anchored at the world origin.
///
/// Cell `(ix, iy)` covers `[ix·res, (ix+1)·res) × [iy·res, (iy+1)·res)`.
/// Storage is row-major with row `iy`. Border cells are always occupied so
/// the world is closed; queries outside the grid report occupied.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<bool>,
}

impl OccupancyGrid {
    /// A grid whose only occupied cells are the border.
    pub fn empty(width: usize, height: usize, resolution: f64) -> Result<Self, WorldError> {
        let mut cells = vec![false; width * height];
        for iy in 0..height {
            for ix in 0..width {
                if ix == 0 || iy == 0 || ix + 1 == width || iy + 1 == height {
                    cells[iy * width + ix] = true;
                }
            }
        }
        Self::from_cells(width, height, resolution, cells)
    }

    pub fn from_cells(
        width: usize,
        height: usize,
        resolution: f64,
        cells: Vec<bool>,
    ) -> Result<Self, WorldError> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(WorldError::InvalidGrid(format!("resolution must be positive, got {resolution}")));
        }
        if width < 3 || height < 3 {
            return Err(WorldError::InvalidGrid(format!("grid {width}x{height} too small")));
        }
        if cells.len() != width * height {
            return Err(WorldError::InvalidGrid(format!(
                "expected {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        let grid = Self { width, height, resolution, cells };
        let open_border = (0..width)
            .flat_map(|ix| [(ix, 0), (ix, height - 1)])
            .chain((0..height).flat_map(|iy| [(0, iy), (width - 1, iy)]))
            .find(|&(ix, iy)| !grid.cells[iy * width + ix]);
        if let Some((ix, iy)) = open_border {
            return Err(WorldError::InvalidGrid(format!("border cell ({ix}, {iy}) is free")));
        }
        Ok(grid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    /// World extent in meters.
    pub fn extent(&self) -> Vec2 {
        Vec2::new(self.width as f64 * self.resolution, self.height as f64 * self.resolution)
    }

    pub fn in_bounds(&self, (ix, iy): Cell) -> bool {
        ix >= 0 && iy >= 0 && (ix as usize) < self.width && (iy as usize) < self.height
    }

    pub fn index(&self, (ix, iy): Cell) -> Option<usize> {
        self.in_bounds((ix, iy)).then(|| iy as usize * self.width + ix as usize)
    }

    pub fn cell_of_index(&self, idx: usize) -> Cell {
        ((idx % self.width) as i64, (idx / self.width) as i64)
    }

    pub fn is_occupied(&self, cell: Cell) -> bool {
        self.index(cell).map_or(true, |i| self.cells[i])
    }

    pub(crate) fn set(&mut self, cell: Cell, occupied: bool) {
        if let Some(i) = self.index(cell) {
            let (ix, iy) = cell;
            let border = ix == 0 || iy == 0 || ix as usize + 1 == self.width || iy as usize + 1 == self.height;
            self.cells[i] = occupied || border;
        }
    }

    pub fn cell_at(&self, p: Vec2) -> Cell {
        (
            (p.x / self.resolution).floor() as i64,
            (p.y / self.resolution).floor() as i64,
        )
    }

    pub fn cell_center(&self, (ix, iy): Cell) -> Vec2 {
        Vec2::new(
            (ix as f64 + 0.5) * self.resolution,
            (iy as f64 + 0.5) * self.resolution,
        )
    }

    pub fn is_occupied_at(&self, p: Vec2) -> bool {
        self.is_occupied(self.cell_at(p))
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|&&c| !c).count()
    }

    /// Parses the plain-text map format: a header line
    /// `width height resolution`, then `height` rows of `#`/`.`, top row first.
    pub fn parse(text: &str) -> Result<Self, WorldError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| WorldError::MapFormat("empty map file".into()))?;
        let mut it = header.split_whitespace();
        let mut field = |name: &str| {
            it.next()
                .ok_or_else(|| WorldError::MapFormat(format!("header missing {name}")))
        };
        let width: usize = field("width")?
            .parse()
            .map_err(|e| WorldError::MapFormat(format!("bad width: {e}")))?;
        let height: usize = field("height")?
            .parse()
            .map_err(|e| WorldError::MapFormat(format!("bad height: {e}")))?;
        let resolution: f64 = field("resolution")?
            .parse()
            .map_err(|e| WorldError::MapFormat(format!("bad resolution: {e}")))?;
        let mut cells = vec![false; width * height];
        let mut rows = 0usize;
        for (row, line) in lines.enumerate() {
            if row >= height {
                return Err(WorldError::MapFormat(format!("more than {height} rows")));
            }
            let line = line.trim_end();
            if line.chars().count() != width {
                return Err(WorldError::MapFormat(format!(
                    "row {row} has {} columns, expected {width}",
                    line.chars().count()
                )));
            }
            let iy = height - 1 - row;
            for (ix, ch) in line.chars().enumerate() {
                cells[iy * width + ix] = match ch {
                    '#' => true,
                    '.' => false,
                    other => {
                        return Err(WorldError::MapFormat(format!("unexpected character {other:?}")))
                    }
                };
            }
            rows += 1;
        }
        if rows != height {
            return Err(WorldError::MapFormat(format!("expected {height} rows, found {rows}")));
        }
        Self::from_cells(width, height, resolution, cells)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * (self.height + 1) + 32);
        writeln!(out, "{} {} {}", self.width, self.height, self.resolution).unwrap();
        for iy in (0..self.height).rev() {
            for ix in 0..self.width {
                out.push(if self.cells[iy * self.width + ix] { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WorldError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| WorldError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), WorldError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| WorldError::Io(path.display().to_string(), e))
    }

    /// Sizes of the 4-connected free components (indexed by label) and the
    /// label of every cell (`usize::MAX` for occupied cells).
    pub fn free_components(&self) -> (Vec<usize>, Vec<usize>) {
        let mut label = vec![usize::MAX; self.cells.len()];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.cells.len() {
            if self.cells[start] || label[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut size = 0;
            label[start] = id;
            stack.push(start);
            while let Some(i) = stack.pop() {
                size += 1;
                let (ix, iy) = self.cell_of_index(i);
                for n in [(ix + 1, iy), (ix - 1, iy), (ix, iy + 1), (ix, iy - 1)] {
                    if let Some(j) = self.index(n) {
                        if !self.cells[j] && label[j] == usize::MAX {
                            label[j] = id;
                            stack.push(j);
                        }
                    }
                }
            }
            sizes.push(size);
        }
        (sizes, label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_has_border_only() {
        let g = OccupancyGrid::empty(5, 4, 0.5).unwrap();
        assert_eq!(g.free_count(), 3 * 2);
        assert!(g.is_occupied((0, 2)));
        assert!(!g.is_occupied((2, 2)));
        assert!(g.is_occupied((-1, 2)));
        assert!(g.is_occupied((5, 0)));
    }

    #[test]
    fn rejects_open_border_and_bad_resolution() {
        let cells = vec![false; 9];
        assert!(OccupancyGrid::from_cells(3, 3, 1.0, cells).is_err());
        assert!(OccupancyGrid::empty(4, 4, 0.0).is_err());
        assert!(OccupancyGrid::empty(4, 4, -1.0).is_err());
    }

    #[test]
    fn text_round_trip_and_orientation() {
        let mut g = OccupancyGrid::empty(6, 5, 0.1).unwrap();
        g.set((1, 3), true);
        let text = g.to_text();
        // Row 1 of the body is iy = 3.
        assert_eq!(text.lines().nth(2).unwrap(), "##...#");
        assert_eq!(OccupancyGrid::parse(&text).unwrap(), g);
    }

    #[test]
    fn parse_errors() {
        assert!(OccupancyGrid::parse("").is_err());
        assert!(OccupancyGrid::parse("3 3 1\n###\n#.#\n").is_err());
        assert!(OccupancyGrid::parse("3 3 1\n###\n#x#\n###\n").is_err());
        assert!(OccupancyGrid::parse("3 3 1\n###\n#.#\n###\n").is_ok());
    }

    #[test]
    fn components() {
        let mut g = OccupancyGrid::empty(7, 5, 1.0).unwrap();
        for iy in 0..5 {
            g.set((3, iy), true);
        }
        let (sizes, _) = g.free_components();
        assert_eq!(sizes, vec![6, 6]);
    }
}
