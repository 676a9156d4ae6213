/** Fixed-width binning starting at zero. */

export interface Histogram {
  binWidth: number;
  /** counts[i] covers [i * binWidth, (i + 1) * binWidth). */
  counts: number[];
}

export function histogram(values: number[], binWidth: number): Histogram {
  if (!(binWidth > 0)) {
    throw new Error("bin width must be positive");
  }
  if (values.length === 0) {
    return { binWidth, counts: [] };
  }
  const nBins = Math.floor(Math.max(...values) / binWidth) + 1;
  const counts = new Array<number>(nBins).fill(0);
  for (const v of values) {
    counts[Math.min(nBins - 1, Math.floor(v / binWidth))] += 1;
  }
  return { binWidth, counts };
}
