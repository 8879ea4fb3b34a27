/**
 * Typed client for the glyphkit HTTP service.
 *
 * Every pixel operation happens server-side; this module only marshals
 * JSON and multipart bodies. Service errors carry {code, message,
 * detail} and are rethrown as ServiceError with the message untouched so
 * the UI can show it verbatim.
 */

export interface FontInfo {
  id: string;
  name: string;
  units_per_em: number;
  glyphs: number;
}

export interface BundleRequest {
  image_png: string;
  polygon: number[];
  text: string;
  font_id: string;
  caption?: string;
  canvas?: number;
  seed?: number;
  tighten?: boolean;
}

export interface BundleReply {
  glyph_png: string;
  position_png: string;
  masked_png: string;
  canvas: number;
  zoomed: boolean;
  region_quad: number[];
}

export interface EditRequest extends BundleRequest {
  backend?: "stub" | "http";
  endpoint?: string;
  tol?: number;
}

export interface EditReply {
  image_png: string;
  zoomed: boolean;
  region_quad: number[];
}

export interface EvaluateRequest {
  manifest: string;
  outputs: string;
  ks?: (number | "full")[];
  ocr_mode?: "truth" | "http";
  ocr_endpoint?: string;
  probe_text?: string;
}

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly code: string,
    readonly detail: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

async function raise(reply: Response): Promise<never> {
  let code = "internal";
  let message = `${reply.status} ${reply.statusText}`;
  let detail = "";
  try {
    const body = await reply.json();
    if (typeof body.message === "string") message = body.message;
    if (typeof body.code === "string") code = body.code;
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the HTTP status line
  }
  throw new ServiceError(message, code, detail, reply.status);
}

export class WorkbenchClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/+$/, "") + path;
  }

  private async post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    const reply = await fetch(this.url(path), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (!reply.ok) await raise(reply);
    return (await reply.json()) as T;
  }

  async healthz(): Promise<boolean> {
    try {
      const reply = await fetch(this.url("/healthz"));
      if (!reply.ok) return false;
      const body = await reply.json();
      return body.status === "ok";
    } catch {
      return false;
    }
  }

  async listFonts(): Promise<FontInfo[]> {
    const reply = await fetch(this.url("/fonts"));
    if (!reply.ok) await raise(reply);
    return (await reply.json()).fonts as FontInfo[];
  }

  async uploadFont(name: string, data: Blob | Uint8Array): Promise<{ id: string; fonts: FontInfo[] }> {
    const blob = data instanceof Blob ? data : new Blob([data as BlobPart]);
    const form = new FormData();
    form.append("file", blob, name);
    const reply = await fetch(this.url("/fonts"), { method: "POST", body: form });
    if (!reply.ok) await raise(reply);
    return await reply.json();
  }

  bundle(req: BundleRequest, signal?: AbortSignal): Promise<BundleReply> {
    return this.post("/bundle", req, signal);
  }

  edit(req: EditRequest, signal?: AbortSignal): Promise<EditReply> {
    return this.post("/edit", req, signal);
  }

  evaluate(req: EvaluateRequest): Promise<Record<string, unknown>> {
    return this.post("/evaluate", req);
  }
}
