/**
 * DOM wiring for the workbench.
 *
 * All pixel work stays on the service: previews, edited results, and the
 * download link embed the service's base64 payloads byte for byte, and
 * the canvas only draws UI chrome (the loaded photo, corner handles, the
 * returned region outline). mountApp builds the whole widget tree under
 * the given root so tests can drive it in jsdom; every canvas 2d call is
 * guarded because jsdom mounts have no raster context.
 */

import {
  ServiceError,
  type BundleReply,
  type BundleRequest,
  type EditReply,
  type FontInfo,
  type WorkbenchClient,
} from "./client.js";
import { encodeQuad, PolygonDraft, type Point, type Quad } from "./quad.js";
import { Session, type HistoryEntry } from "./session.js";

export interface AppDeps {
  client: WorkbenchClient;
  session: Session;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

function pngUrl(b64: string): string {
  return `data:image/png;base64,${b64}`;
}

function encodeBytes(buf: ArrayBuffer): string {
  const bytes = new Uint8Array(buf);
  let binary = "";
  // String.fromCharCode blows the arg limit on whole files; chunk it.
  for (let i = 0; i < bytes.length; i += 0x8000) {
    binary += String.fromCharCode(...bytes.subarray(i, i + 0x8000));
  }
  return btoa(binary);
}

export class App {
  readonly client: WorkbenchClient;
  readonly session: Session;
  readonly draft = new PolygonDraft();

  /** Last reply from /bundle; drag-refresh and history viewing read it. */
  lastBundle: BundleReply | null = null;
  /** Most recent async operation, awaitable by tests. */
  lastOp: Promise<void> | null = null;

  private controller: AbortController | null = null;
  private dragIndex = -1;
  private dragMoved = false;
  private suppressClick = false;
  private photo: HTMLImageElement | null = null;

  readonly canvas: HTMLCanvasElement;
  readonly banner: HTMLElement;
  readonly status: HTMLElement;
  readonly readout: HTMLElement;
  readonly block: HTMLElement;
  readonly fontSelect: HTMLSelectElement;
  readonly textInput: HTMLInputElement;
  readonly captionInput: HTMLInputElement;
  readonly seedInput: HTMLInputElement;
  readonly tightenInput: HTMLInputElement;
  readonly backendSelect: HTMLSelectElement;
  readonly endpointInput: HTMLInputElement;
  readonly glyphImg: HTMLImageElement;
  readonly positionImg: HTMLImageElement;
  readonly maskedImg: HTMLImageElement;
  readonly resultImg: HTMLImageElement;
  readonly download: HTMLAnchorElement;
  readonly historyList: HTMLOListElement;

  constructor(root: HTMLElement, deps: AppDeps) {
    this.client = deps.client;
    this.session = deps.session;

    this.banner = el("div", { id: "gk-banner", class: "banner", hidden: "" });
    this.status = el("span", { id: "gk-status" }, "idle");

    const urlInput = el("input", { id: "gk-url", value: this.client.baseUrl });
    const connect = el("button", { id: "gk-connect" }, "check service");
    connect.addEventListener("click", () => {
      this.lastOp = this.checkService();
    });

    const imageInput = el("input", { id: "gk-image", type: "file", accept: "image/png" });
    imageInput.addEventListener("change", () => {
      const file = imageInput.files?.[0];
      if (file) this.lastOp = this.loadImageFile(file);
    });

    const fontInput = el("input", { id: "gk-font-file", type: "file" });
    fontInput.addEventListener("change", () => {
      const file = fontInput.files?.[0];
      if (file) this.lastOp = this.uploadFont(file);
    });
    this.fontSelect = el("select", { id: "gk-fonts" });
    this.fontSelect.addEventListener("change", () => {
      this.session.state.fontId = this.fontSelect.value;
      this.session.save();
    });

    this.canvas = el("canvas", { id: "gk-canvas", width: "512", height: "512" });
    this.canvas.addEventListener("mousedown", (ev) => this.onMouseDown(ev));
    this.canvas.addEventListener("mousemove", (ev) => this.onMouseMove(ev));
    this.canvas.addEventListener("mouseup", () => this.onMouseUp());
    this.canvas.addEventListener("click", (ev) => this.onClick(ev));

    this.readout = el("code", { id: "gk-readout" });
    this.block = el("span", { id: "gk-block", class: "block-reason" });
    const reset = el("button", { id: "gk-reset" }, "reset polygon");
    reset.addEventListener("click", () => {
      this.draft.reset();
      this.syncDraft();
      this.block.textContent = "";
    });

    this.textInput = this.boundInput("gk-text", "text");
    this.captionInput = this.boundInput("gk-caption", "caption");
    this.seedInput = el("input", { id: "gk-seed", type: "number", value: "0" });
    this.seedInput.addEventListener("change", () => {
      this.session.state.seed = Number(this.seedInput.value) || 0;
      this.session.save();
    });
    this.tightenInput = el("input", { id: "gk-tighten", type: "checkbox" });
    this.tightenInput.addEventListener("change", () => {
      this.session.state.tighten = this.tightenInput.checked;
      this.session.save();
    });
    this.backendSelect = el("select", { id: "gk-backend" });
    for (const name of ["stub", "http"]) {
      this.backendSelect.append(el("option", { value: name }, name));
    }
    this.backendSelect.addEventListener("change", () => {
      this.session.state.backend = this.backendSelect.value as "stub" | "http";
      this.session.save();
    });
    this.endpointInput = this.boundInput("gk-endpoint", "endpoint");

    const preview = el("button", { id: "gk-preview" }, "preview controls");
    preview.addEventListener("click", () => {
      this.lastOp = this.preview();
    });
    const edit = el("button", { id: "gk-edit" }, "run edit");
    edit.addEventListener("click", () => {
      this.lastOp = this.runEdit();
    });
    const cancel = el("button", { id: "gk-cancel" }, "cancel");
    cancel.addEventListener("click", () => this.cancel());
    this.download = el("a", { id: "gk-download", download: "edited.png", hidden: "" }, "download result");

    this.glyphImg = el("img", { id: "gk-glyph", alt: "glyph control" });
    this.positionImg = el("img", { id: "gk-position", alt: "position control" });
    this.maskedImg = el("img", { id: "gk-masked", alt: "masked target" });
    this.resultImg = el("img", { id: "gk-result", alt: "edited image" });
    this.historyList = el("ol", { id: "gk-history" });

    const row = (cls: string, ...children: (HTMLElement | string)[]) => {
      const div = el("div", { class: cls });
      div.append(...children);
      return div;
    };
    root.append(
      this.banner,
      row("toolbar", urlInput, connect, this.status),
      row("toolbar", imageInput, fontInput, this.fontSelect),
      row("stage", this.canvas),
      row("toolbar", this.readout, this.block, reset),
      row(
        "toolbar",
        label("text", this.textInput),
        label("caption", this.captionInput),
        label("seed", this.seedInput),
        label("tighten", this.tightenInput),
        label("backend", this.backendSelect),
        label("endpoint", this.endpointInput),
      ),
      row("toolbar", preview, edit, cancel, this.download),
      row("previews", this.glyphImg, this.positionImg, this.maskedImg),
      row("result", this.resultImg),
      this.historyList,
    );

    urlInput.addEventListener("change", () => {
      // Client base URL is fixed per mount; a changed URL needs a remount.
      urlInput.value = this.client.baseUrl;
    });

    this.restoreFromSession();
  }

  private boundInput(id: string, key: "text" | "caption" | "endpoint"): HTMLInputElement {
    const input = el("input", { id, type: "text" });
    input.addEventListener("input", () => {
      this.session.state[key] = input.value;
      this.session.save();
    });
    return input;
  }

  private restoreFromSession(): void {
    const s = this.session.state;
    this.textInput.value = s.text;
    this.captionInput.value = s.caption;
    this.seedInput.value = String(s.seed);
    this.tightenInput.checked = s.tighten;
    this.backendSelect.value = s.backend;
    this.endpointInput.value = s.endpoint;
    for (const p of s.draftPoints) this.draft.addPoint(p);
    this.renderHistory();
    const entry = this.session.current();
    if (entry) this.showEntry(entry);
    if (s.imagePng) this.setPhoto(s.imagePng);
    this.syncDraft();
  }

  // -- service calls ------------------------------------------------------

  async checkService(): Promise<void> {
    const ok = await this.client.healthz();
    if (!ok) {
      this.showBanner(`service unreachable at ${this.client.baseUrl}; retry when it is up`);
      this.status.textContent = "offline";
      return;
    }
    this.clearBanner();
    this.status.textContent = "connected";
    try {
      this.setFonts(await this.client.listFonts());
    } catch (err) {
      this.showError(err);
    }
  }

  async uploadFont(file: File): Promise<void> {
    try {
      const reply = await this.client.uploadFont(file.name, file);
      this.setFonts(reply.fonts);
      this.fontSelect.value = reply.id;
      this.session.state.fontId = reply.id;
      this.session.save();
      this.clearBanner();
      this.status.textContent = `font ${reply.id} ready`;
    } catch (err) {
      this.showError(err);
    }
  }

  async loadImageFile(file: File): Promise<void> {
    const buf = await file.arrayBuffer();
    this.session.state.imagePng = encodeBytes(buf);
    this.session.state.imageName = file.name;
    this.session.save();
    this.setPhoto(this.session.state.imagePng);
    this.status.textContent = `image ${file.name} loaded`;
  }

  /** Request the three controls and show them side by side. */
  async preview(): Promise<void> {
    let quad: Quad;
    try {
      quad = this.draft.commit();
    } catch (err) {
      this.block.textContent = (err as Error).message;
      return;
    }
    const req = this.bundleRequest(quad);
    if (!req) return;
    try {
      const reply = await this.client.bundle(req);
      this.lastBundle = reply;
      this.glyphImg.src = pngUrl(reply.glyph_png);
      this.positionImg.src = pngUrl(reply.position_png);
      this.maskedImg.src = pngUrl(reply.masked_png);
      this.session.addHistory(this.entryFor("bundle", quad, reply, undefined));
      this.renderHistory();
      this.clearBanner();
      this.status.textContent = reply.zoomed ? "controls ready (zoomed)" : "controls ready";
      this.draw();
    } catch (err) {
      this.showError(err);
    }
  }

  /** Send the edit; cancel() aborts the in-flight request. */
  async runEdit(): Promise<void> {
    let quad: Quad;
    try {
      quad = this.draft.commit();
    } catch (err) {
      this.block.textContent = (err as Error).message;
      return;
    }
    const base = this.bundleRequest(quad);
    if (!base) return;
    const s = this.session.state;
    const controller = new AbortController();
    this.controller = controller;
    this.status.textContent = "editing...";
    try {
      const reply = await this.client.edit(
        { ...base, backend: s.backend, endpoint: s.endpoint || undefined },
        controller.signal,
      );
      this.resultImg.src = pngUrl(reply.image_png);
      this.download.href = pngUrl(reply.image_png);
      this.download.hidden = false;
      this.session.addHistory(this.entryFor("edit", quad, this.lastBundle ?? undefined, reply));
      this.renderHistory();
      this.clearBanner();
      this.status.textContent = reply.zoomed ? "edited (zoomed)" : "edited";
      this.draw();
    } catch (err) {
      if ((err as Error).name === "AbortError") {
        this.status.textContent = "edit cancelled";
      } else {
        this.showError(err);
      }
    } finally {
      if (this.controller === controller) this.controller = null;
    }
  }

  cancel(): void {
    this.controller?.abort();
  }

  private bundleRequest(quad: Quad): BundleRequest | null {
    const s = this.session.state;
    if (!s.imagePng) {
      this.showBanner("load a PNG image before requesting controls");
      return null;
    }
    if (!s.fontId) {
      this.showBanner("upload or pick a font before requesting controls");
      return null;
    }
    return {
      image_png: s.imagePng,
      polygon: quad.flatMap((p) => [p.x, p.y]),
      text: s.text,
      font_id: s.fontId,
      caption: s.caption,
      seed: s.seed,
      tighten: s.tighten,
    };
  }

  private entryFor(
    kind: "bundle" | "edit",
    quad: Quad,
    bundle: BundleReply | undefined,
    edit: EditReply | undefined,
  ): HistoryEntry {
    const s = this.session.state;
    return {
      kind,
      at: new Date().toISOString(),
      text: s.text,
      fontId: s.fontId,
      seed: s.seed,
      tighten: s.tighten,
      encodedQuad: encodeQuad(quad),
      bundle,
      edit,
    };
  }

  // -- history ------------------------------------------------------------

  renderHistory(): void {
    this.historyList.textContent = "";
    this.session.state.history.forEach((entry, i) => {
      const item = el(
        "li",
        { "data-index": String(i) },
        `${entry.kind} "${entry.text}" seed=${entry.seed}${entry.tighten ? " tighten" : ""} @ ${entry.encodedQuad}`,
      );
      if (i === this.session.state.selected) item.setAttribute("data-selected", "true");
      item.addEventListener("click", () => {
        this.showEntry(this.session.select(i));
        this.renderHistory();
      });
      this.historyList.append(item);
    });
  }

  /** Re-select an older result; nothing is recomputed locally. */
  showEntry(entry: HistoryEntry): void {
    if (entry.bundle) {
      this.lastBundle = entry.bundle;
      this.glyphImg.src = pngUrl(entry.bundle.glyph_png);
      this.positionImg.src = pngUrl(entry.bundle.position_png);
      this.maskedImg.src = pngUrl(entry.bundle.masked_png);
    }
    if (entry.edit) {
      this.resultImg.src = pngUrl(entry.edit.image_png);
      this.download.href = pngUrl(entry.edit.image_png);
      this.download.hidden = false;
    }
    this.draw();
  }

  // -- canvas -------------------------------------------------------------

  private canvasPoint(ev: { clientX: number; clientY: number }): Point {
    const rect = this.canvas.getBoundingClientRect();
    // jsdom reports a zero-size rect; fall back to 1:1 client coords.
    const sx = rect.width > 0 ? this.canvas.width / rect.width : 1;
    const sy = rect.height > 0 ? this.canvas.height / rect.height : 1;
    return { x: (ev.clientX - rect.left) * sx, y: (ev.clientY - rect.top) * sy };
  }

  private onMouseDown(ev: MouseEvent): void {
    const hit = this.draft.hitCorner(this.canvasPoint(ev), 8);
    if (hit >= 0) {
      this.dragIndex = hit;
      this.dragMoved = false;
    }
  }

  private onMouseMove(ev: MouseEvent): void {
    if (this.dragIndex < 0) return;
    this.draft.movePoint(this.dragIndex, this.canvasPoint(ev));
    this.dragMoved = true;
    this.syncDraft();
  }

  private onMouseUp(): void {
    if (this.dragIndex < 0) return;
    const moved = this.dragMoved;
    this.dragIndex = -1;
    this.dragMoved = false;
    this.suppressClick = moved;
    if (moved && this.lastBundle && !this.draft.blockReason()) {
      // A finished drag refreshes the preview in the same interaction.
      this.lastOp = this.preview();
    }
  }

  private onClick(ev: MouseEvent): void {
    if (this.suppressClick) {
      this.suppressClick = false;
      return;
    }
    if (this.draft.complete) return;
    this.draft.addPoint(this.canvasPoint(ev));
    this.syncDraft();
  }

  private syncDraft(): void {
    this.session.state.draftPoints = this.draft.points.map((p) => ({ ...p }));
    this.session.save();
    this.readout.textContent = this.draft.encoded();
    this.block.textContent = this.draft.intersecting ? this.draft.blockReason() ?? "" : "";
    this.draw();
  }

  private setPhoto(b64: string): void {
    const img = new Image();
    img.onload = () => {
      this.canvas.width = img.naturalWidth || this.canvas.width;
      this.canvas.height = img.naturalHeight || this.canvas.height;
      this.photo = img;
      this.draw();
    };
    img.src = pngUrl(b64);
  }

  draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    if (this.photo) ctx.drawImage(this.photo, 0, 0);
    if (this.lastBundle && this.lastBundle.region_quad.length === 8) {
      this.strokeLoop(ctx, this.lastBundle.region_quad, "#2a9d8f");
    }
    const pts = this.draft.points;
    if (pts.length > 0) {
      const color = this.draft.intersecting ? "#e63946" : "#457b9d";
      ctx.strokeStyle = color;
      ctx.fillStyle = color;
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(pts[0].x, pts[0].y);
      for (let i = 1; i < pts.length; i++) ctx.lineTo(pts[i].x, pts[i].y);
      if (this.draft.complete) ctx.closePath();
      ctx.stroke();
      for (const p of pts) {
        ctx.beginPath();
        ctx.arc(p.x, p.y, 4, 0, Math.PI * 2);
        ctx.fill();
      }
    }
  }

  private strokeLoop(ctx: CanvasRenderingContext2D, flat: number[], color: string): void {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(flat[0], flat[1]);
    for (let i = 2; i < flat.length; i += 2) ctx.lineTo(flat[i], flat[i + 1]);
    ctx.closePath();
    ctx.stroke();
  }

  // -- feedback -----------------------------------------------------------

  setFonts(fonts: FontInfo[]): void {
    const keep = this.fontSelect.value || this.session.state.fontId;
    this.fontSelect.textContent = "";
    for (const font of fonts) {
      this.fontSelect.append(
        el("option", { value: font.id }, `${font.name} (${font.glyphs} glyphs, ${font.units_per_em} upm)`),
      );
    }
    if (fonts.some((f) => f.id === keep)) this.fontSelect.value = keep;
  }

  private showError(err: unknown): void {
    if (err instanceof ServiceError) {
      this.showBanner(err.detail ? `${err.message} [${err.detail}]` : err.message);
    } else {
      this.showBanner(`service unreachable: ${(err as Error).message}`);
    }
    this.status.textContent = "error";
  }

  /** The banner informs; it never disables the rest of the UI. */
  private showBanner(message: string): void {
    this.banner.textContent = message;
    this.banner.hidden = false;
  }

  private clearBanner(): void {
    this.banner.textContent = "";
    this.banner.hidden = true;
  }
}

function label(text: string, input: HTMLElement): HTMLLabelElement {
  const node = document.createElement("label");
  node.append(text, input);
  return node;
}

export function mountApp(root: HTMLElement, deps: AppDeps): App {
  return new App(root, deps);
}
