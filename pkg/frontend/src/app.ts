// Application controller: navigation between the four screens and the
// single-in-flight upload rule. All data comes from the service API.

import { ApiError, MAX_UPLOAD_BYTES, dateImage, getArtifact } from "./api.js";
import { showBanner, showDetail, showMain, showResult, showSpinner } from "./screens.js";
import { toResultViewModel } from "./viewmodel.js";
import type { ResultViewModel } from "./viewmodel.js";

export interface AppOptions {
  baseUrl?: string;
  maxUploadBytes?: number;
  /** jsdom has no URL.createObjectURL; tests inject a stand-in */
  objectUrlFor?: (file: File) => string;
}

export class App {
  private busy = false;
  private lastFile: File | null = null;
  private currentResult: ResultViewModel | null = null;
  private readonly baseUrl: string;
  private readonly maxUploadBytes: number;
  private readonly objectUrlFor: (file: File) => string;

  constructor(
    private readonly root: HTMLElement,
    options: AppOptions = {},
  ) {
    this.baseUrl = options.baseUrl ?? "";
    this.maxUploadBytes = options.maxUploadBytes ?? MAX_UPLOAD_BYTES;
    this.objectUrlFor =
      options.objectUrlFor ?? ((file) => URL.createObjectURL(file));
  }

  start(): void {
    this.showMain();
  }

  showMain(): void {
    showMain(this.root, { onFile: (file) => void this.submitFile(file) });
  }

  /** Upload one photo and render the result screen. */
  async submitFile(file: File): Promise<void> {
    if (this.busy) {
      return; // one upload in flight; later submissions wait for the spinner to clear
    }
    this.lastFile = file;
    if (file.size > this.maxUploadBytes) {
      // mirror of the server cap: no network round trip for oversized files
      showBanner(this.root, "Photo is too large to upload.", "error");
      return;
    }
    this.busy = true;
    const spinner = showSpinner(this.root);
    this.setButtonsDisabled(true);
    try {
      const response = await dateImage(file, this.baseUrl);
      this.currentResult = toResultViewModel(response, this.objectUrlFor(file));
      this.showResult();
    } catch (error) {
      spinner.remove();
      this.setButtonsDisabled(false);
      if (error instanceof ApiError) {
        showBanner(this.root, error.userMessage, "error");
      } else {
        showBanner(this.root, "Network failure while uploading.", "error", () => {
          if (this.lastFile) void this.submitFile(this.lastFile);
        });
      }
      return;
    } finally {
      this.busy = false;
    }
  }

  private setButtonsDisabled(disabled: boolean): void {
    for (const button of Array.from(this.root.querySelectorAll("button"))) {
      (button as HTMLButtonElement).disabled = disabled;
    }
  }

  showResult(): void {
    if (!this.currentResult) {
      this.showMain();
      return;
    }
    showResult(this.root, this.currentResult, {
      onBack: () => this.showMain(),
      onReference: (id) => void this.showReference(id),
    });
  }

  /** Fetch one reference artifact and render its detail screen. */
  async showReference(id: string): Promise<void> {
    try {
      const detail = await getArtifact(id, this.baseUrl);
      showDetail(this.root, detail, { onBack: () => this.showResult() });
    } catch {
      showDetail(this.root, null, { onBack: () => this.showResult() });
    }
  }
}

export function createApp(root: HTMLElement, options: AppOptions = {}): App {
  const app = new App(root, options);
  app.start();
  return app;
}
