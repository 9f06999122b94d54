/**
 * Application shell: the create-session form, stage stepper, scene editor,
 * and iteration browser, all re-rendered from server state after every
 * action. The server is the single source of truth — every displayed
 * scene, SVG, and prompt comes from an endpoint, never local computation.
 */

import { ApiClient, ApiError } from "./api.js";
import { renderEditor } from "./editor.js";
import { renderHistory } from "./history.js";
import {
  bufferEdit,
  clearBuffer,
  initialViewState,
  pruneBuffer,
  selectPath,
  type ViewState,
} from "./state.js";
import { renderStepper } from "./stepper.js";
import type { EditOp, Session } from "./types.js";

export class App {
  state: ViewState = initialViewState();
  session: Session | null = null;
  private svgCache = new Map<number, string>();
  private promptCache = new Map<number, string>();
  private lastError = "";
  private chain: Promise<void> = Promise.resolve();

  constructor(
    public readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {
    this.render();
  }

  /** All handlers run through here so tests can await quiescence. */
  private run(action: () => Promise<void>): Promise<void> {
    this.chain = this.chain.then(async () => {
      this.lastError = "";
      try {
        await action();
      } catch (error) {
        this.lastError =
          error instanceof ApiError
            ? `${error.status}: ${error.body.detail}`
            : String(error);
      }
      this.render();
    });
    return this.chain;
  }

  settled(): Promise<void> {
    return this.chain;
  }

  createSession(inputText: string): Promise<void> {
    return this.run(async () => {
      this.session = await this.api.createSession(inputText);
      this.state = { ...initialViewState(), sessionId: this.session.id };
      this.svgCache.clear();
      this.promptCache.clear();
    });
  }

  advance(): Promise<void> {
    return this.run(async () => {
      if (!this.session) return;
      this.session = await this.api.advance(this.session.id, { seed: 7 });
      await this.refreshArtifacts();
    });
  }

  select(path: string | null): Promise<void> {
    return this.run(async () => {
      this.state = selectPath(this.state, path);
    });
  }

  buffer(edit: EditOp): Promise<void> {
    return this.run(async () => {
      if (!this.session?.current_scene) return;
      this.state = bufferEdit(this.state, this.session.current_scene, edit);
    });
  }

  applyBuffer(): Promise<void> {
    return this.run(async () => {
      if (!this.session || this.state.buffer.length === 0) return;
      this.session = await this.api.iterate(this.session.id, this.state.buffer);
      this.state = clearBuffer(this.state);
      this.state = pruneBuffer(this.state, this.session.current_scene);
      if (
        this.state.selectedPath &&
        this.session.current_scene &&
        !this.session.current_scene.elements.length
      ) {
        this.state = selectPath(this.state, null);
      }
      await this.refreshArtifacts();
    });
  }

  /** Fetch any missing per-iteration SVGs and prompts from the service. */
  private async refreshArtifacts(): Promise<void> {
    if (!this.session) return;
    for (const record of this.session.iterations) {
      if (!this.svgCache.has(record.index)) {
        this.svgCache.set(record.index, await this.api.iterationSvg(this.session.id, record.index));
      }
      if (!this.promptCache.has(record.index)) {
        this.promptCache.set(
          record.index,
          await this.api.iterationPrompt(this.session.id, record.index),
        );
      }
    }
  }

  latestSvg(): string {
    if (!this.session || this.session.iterations.length === 0) return "";
    const last = this.session.iterations[this.session.iterations.length - 1];
    return this.svgCache.get(last.index) ?? "";
  }

  render(): void {
    this.root.innerHTML = "";

    if (!this.session) {
      const form = document.createElement("form");
      form.className = "create-session";
      const textarea = document.createElement("textarea");
      textarea.name = "input-text";
      textarea.placeholder = "Paste the source text here";
      const submit = document.createElement("button");
      submit.type = "submit";
      submit.textContent = "Create session";
      form.appendChild(textarea);
      form.appendChild(submit);
      form.addEventListener("submit", (event) => {
        event.preventDefault();
        void this.createSession(textarea.value);
      });
      this.root.appendChild(form);
      if (this.lastError) {
        const banner = document.createElement("div");
        banner.className = "error-banner";
        banner.textContent = this.lastError;
        this.root.appendChild(banner);
      }
      return;
    }

    const stepper = document.createElement("section");
    stepper.id = "stepper";
    renderStepper(stepper, this.session, { onAdvance: () => void this.advance() }, this.lastError);
    this.root.appendChild(stepper);

    if (this.session.current_scene) {
      const editor = document.createElement("section");
      editor.id = "editor";
      renderEditor(
        editor,
        this.session.current_scene,
        this.latestSvg(),
        this.state,
        {
          onSelect: (path) => void this.select(path),
          onBuffer: (edit) => void this.buffer(edit),
          onApply: () => void this.applyBuffer(),
        },
        this.lastError,
      );
      this.root.appendChild(editor);
    }

    if (this.session.iterations.length > 0) {
      const history = document.createElement("section");
      history.id = "history";
      renderHistory(history, this.session, {
        svgByIteration: this.svgCache,
        promptByIteration: this.promptCache,
      });
      this.root.appendChild(history);
    }
  }
}

export function mountApp(root: HTMLElement, baseUrl: string): App {
  return new App(new ApiClient(baseUrl), root);
}

// Browser bootstrap; tests mount explicitly instead.
if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root instanceof HTMLElement && root.dataset.autoboot === "true") {
    const params = new URLSearchParams(window.location.search);
    mountApp(root, params.get("api") ?? "http://127.0.0.1:8000");
  }
}
