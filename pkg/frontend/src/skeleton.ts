/** Default edge list for the synthetic 53-vertex skeleton.
 * Unknown datasets render as point clouds when edges do not apply. */

export const SYNTHETIC_EDGES: ReadonlyArray<readonly [number, number]> = [
  [0, 1], [0, 2],
  [1, 3], [3, 4], [4, 5], [5, 6], [6, 7], [6, 8], [8, 9],
  [2, 10], [10, 11], [11, 12], [12, 13], [13, 14], [13, 15], [15, 16],
  [0, 17], [17, 18], [18, 19], [19, 20], [20, 21], [21, 22], [22, 23],
  [22, 24], [22, 25], [22, 26],
  [20, 27], [27, 28], [28, 29], [29, 30], [30, 31], [31, 32], [32, 33], [33, 34],
  [20, 35], [35, 36], [36, 37], [37, 38], [38, 39], [39, 40], [40, 41], [41, 42],
  [28, 43], [36, 44], [32, 45], [40, 46], [4, 47], [11, 48],
  [20, 49], [20, 50], [18, 51], [18, 52],
];

export const VERTEX_COUNT = 53;
