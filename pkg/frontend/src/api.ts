/** Typed client for the facetok HTTP/JSON API. The UI performs no motion
 * math of its own: every vertex rendered comes verbatim from these calls. */

export interface LexiconEmotion {
  name: string;
  base_word: string;
  gerund: string;
}

export interface LexiconIntensity {
  name: string;
  adverb: string;
  adjective: string;
  amplitude: number;
}

export interface LexiconMotion {
  name: string;
  axis: string;
  gerund_phrase: string;
}

export interface Lexicon {
  emotions: LexiconEmotion[];
  intensities: LexiconIntensity[];
  motions: LexiconMotion[];
  subjects: string[];
  questions: string[];
  k_geometry: number;
}

export interface GenerateRequest {
  prompt: string;
  temperature?: number;
  top_k?: number;
  seed?: number;
}

export interface FramesPayload {
  tokens: number[];
  n_frames: number;
  n_vertices: number;
  fps: number;
  duration_s: number;
  expr: number[][];
  pose: number[][];
  vertices_b64: string;
}

export interface DescribeResponse {
  description: string;
  question: string;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function requestJson<T>(
  fetchFn: FetchLike,
  url: string,
  init?: RequestInit,
): Promise<T> {
  const res = await fetchFn(url, init);
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class ApiClient {
  constructor(private fetchFn: FetchLike = fetch.bind(globalThis)) {}

  health(): Promise<{ status: string; stages: Record<string, boolean> }> {
    return requestJson(this.fetchFn, "/api/health");
  }

  lexicon(): Promise<Lexicon> {
    return requestJson(this.fetchFn, "/api/lexicon");
  }

  generate(req: GenerateRequest): Promise<FramesPayload> {
    return requestJson(this.fetchFn, "/api/generate", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  describe(tokens: number[], question?: string): Promise<DescribeResponse> {
    return requestJson(this.fetchFn, "/api/describe", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(question === undefined ? { tokens } : { tokens, question }),
    });
  }
}

/** Base64 little-endian float32 -> per-frame vertex arrays (nFrames x 3V). */
export function decodeVertexFrames(
  b64: string,
  nFrames: number,
  nVertices: number,
): Float32Array[] {
  const bin = atob(b64);
  const bytes = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) bytes[i] = bin.charCodeAt(i);
  const floats = new Float32Array(bytes.buffer);
  const per = nVertices * 3;
  if (floats.length !== nFrames * per) {
    throw new Error(
      `vertex payload has ${floats.length} floats, expected ${nFrames * per}`,
    );
  }
  const frames: Float32Array[] = [];
  for (let f = 0; f < nFrames; f++) {
    frames.push(floats.subarray(f * per, (f + 1) * per));
  }
  return frames;
}
