/** Orbitable 3D point-cloud renderer for the decoded face mesh.
 * Vertices arrive server-decoded; this module only projects and draws. */

export interface Camera {
  /** Orbit angles in radians. */
  azimuth: number;
  elevation: number;
  zoom: number;
}

export function defaultCamera(): Camera {
  return { azimuth: 0.35, elevation: 0.12, zoom: 1.0 };
}

/** Project (x, y, z) world points to canvas pixels with a simple orbit
 * camera and orthographic projection (depth returned for shading). */
export function projectPoints(
  vertices: Float32Array, // 3V interleaved x,y,z
  camera: Camera,
  width: number,
  height: number,
): { xs: Float32Array; ys: Float32Array; depth: Float32Array } {
  const n = vertices.length / 3;
  const xs = new Float32Array(n);
  const ys = new Float32Array(n);
  const depth = new Float32Array(n);
  const ca = Math.cos(camera.azimuth);
  const sa = Math.sin(camera.azimuth);
  const ce = Math.cos(camera.elevation);
  const se = Math.sin(camera.elevation);
  const scale = (Math.min(width, height) / 2.6) * camera.zoom;
  const cx = width / 2;
  const cy = height / 2;
  for (let i = 0; i < n; i++) {
    const x = vertices[3 * i];
    const y = vertices[3 * i + 1];
    const z = vertices[3 * i + 2];
    // rotate about Y (azimuth), then X (elevation)
    const x1 = ca * x + sa * z;
    const z1 = -sa * x + ca * z;
    const y2 = ce * y - se * z1;
    const z2 = se * y + ce * z1;
    xs[i] = cx + x1 * scale;
    ys[i] = cy - y2 * scale;
    depth[i] = z2;
  }
  return { xs, ys, depth };
}

export function drawFrame(
  ctx: CanvasRenderingContext2D,
  vertices: Float32Array,
  camera: Camera,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  const { xs, ys, depth } = projectPoints(vertices, camera, width, height);
  let dMin = Infinity;
  let dMax = -Infinity;
  for (const d of depth) {
    if (d < dMin) dMin = d;
    if (d > dMax) dMax = d;
  }
  const span = Math.max(dMax - dMin, 1e-6);
  for (let i = 0; i < xs.length; i++) {
    const t = (depth[i] - dMin) / span; // nearer points brighter and larger
    const lum = Math.round(110 + 130 * t);
    ctx.fillStyle = `rgb(${lum - 40}, ${lum}, ${lum + 15})`;
    const r = 1.1 + 1.3 * t;
    ctx.beginPath();
    ctx.arc(xs[i], ys[i], r, 0, Math.PI * 2);
    ctx.fill();
  }
}
