use std::collections::VecDeque;

/// Binary per-pixel mask; `true` marks shadow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShadowMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl ShadowMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Self {
        assert_eq!(data.len(), width * height, "mask data length mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Out-of-bounds reads as `false`.
    #[inline]
    pub fn get_or_false(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn invert(&self) -> ShadowMask {
        ShadowMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|b| !b).collect(),
        }
    }

    /// `self ∖ other`.
    pub fn minus(&self, other: &ShadowMask) -> ShadowMask {
        self.zip(other, |a, b| a && !b)
    }

    pub fn union(&self, other: &ShadowMask) -> ShadowMask {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &ShadowMask) -> ShadowMask {
        self.zip(other, |a, b| a && b)
    }

    fn zip(&self, other: &ShadowMask, f: impl Fn(bool, bool) -> bool) -> ShadowMask {
        assert_eq!((self.width, self.height), (other.width, other.height));
        ShadowMask {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Dilation by a `(2r+1)²` square structuring element.
    pub fn dilate(&self, radius: usize) -> ShadowMask {
        self.window_op(radius, true)
    }

    /// Erosion by a `(2r+1)²` square; the window is clipped at the image
    /// border, so a full mask stays full.
    pub fn erode(&self, radius: usize) -> ShadowMask {
        self.window_op(radius, false)
    }

    fn window_op(&self, radius: usize, dilate: bool) -> ShadowMask {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.width, self.height);
        // Separable pass using a running count of set pixels in the window.
        let pass = |src: &[bool], len: usize, lines: usize, idx: &dyn Fn(usize, usize) -> usize| {
            let mut out = vec![false; src.len()];
            for line in 0..lines {
                let mut prefix = vec![0usize; len + 1];
                for i in 0..len {
                    prefix[i + 1] = prefix[i] + src[idx(line, i)] as usize;
                }
                for i in 0..len {
                    let lo = i.saturating_sub(radius);
                    let hi = (i + radius).min(len - 1);
                    let set = prefix[hi + 1] - prefix[lo];
                    out[idx(line, i)] = if dilate { set > 0 } else { set == hi - lo + 1 };
                }
            }
            out
        };
        let horizontal = pass(&self.data, w, h, &|line, i| line * w + i);
        let data = pass(&horizontal, h, w, &|line, i| i * w + line);
        ShadowMask {
            width: w,
            height: h,
            data,
        }
    }

    /// 8-connected component labels (0 = background, components numbered
    /// from 1 in raster order of their first pixel) and the component count.
    pub fn components(&self) -> (Vec<u32>, usize) {
        let (w, h) = (self.width, self.height);
        let mut labels = vec![0u32; w * h];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for start in 0..w * h {
            if !self.data[start] || labels[start] != 0 {
                continue;
            }
            next += 1;
            labels[start] = next;
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                let (x, y) = ((i % w) as isize, (i / w) as isize);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if self.get_or_false(nx, ny) {
                            let j = ny as usize * w + nx as usize;
                            if labels[j] == 0 {
                                labels[j] = next;
                                queue.push_back(j);
                            }
                        }
                    }
                }
            }
        }
        (labels, next as usize)
    }

    /// Mask of a single component label.
    pub fn component_mask(labels: &[u32], width: usize, height: usize, label: u32) -> ShadowMask {
        ShadowMask {
            width,
            height,
            data: labels.iter().map(|&l| l == label).collect(),
        }
    }

    /// Drops components with fewer than `min_pixels` pixels.
    pub fn remove_small_components(&self, min_pixels: usize) -> ShadowMask {
        let (labels, n) = self.components();
        let mut sizes = vec![0usize; n + 1];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        ShadowMask {
            width: self.width,
            height: self.height,
            data: labels
                .iter()
                .map(|&l| l != 0 && sizes[l as usize] >= min_pixels)
                .collect(),
        }
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }
}
