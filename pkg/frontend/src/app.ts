/**
 * Page wiring: load the interpreter and the runtime wheel served next to
 * the page, run the embedded fixture episode, and render its transcript.
 * Any failure surfaces in the error banner; nothing fails silently.
 */

import { loadHostBinding, type PyodideLoader } from "./binding.js";
import { FIXTURE_CONFIG, FIXTURE_TASK } from "./fixture.js";
import { parseTranscript, renderTranscript, renderVersion, showError } from "./view.js";

const PYODIDE_MODULE_URL = "./pyodide/pyodide.mjs";
const WHEEL_URL = "./runtime.whl";

async function fetchWheel(url: string): Promise<Uint8Array> {
  let response: Response;
  try {
    response = await fetch(url);
  } catch {
    throw new Error(`missing artifact: ${url}`);
  }
  if (!response.ok) {
    throw new Error(`missing artifact: ${url} (HTTP ${response.status})`);
  }
  return new Uint8Array(await response.arrayBuffer());
}

async function importLoader(url: string): Promise<PyodideLoader> {
  const moduleUrl = new URL(url, import.meta.url).href;
  let mod: unknown;
  try {
    mod = await import(moduleUrl);
  } catch {
    throw new Error(`missing artifact: ${url}`);
  }
  const loadPyodide = (mod as { loadPyodide?: unknown }).loadPyodide;
  if (typeof loadPyodide !== "function") {
    throw new Error(`${url} does not export loadPyodide()`);
  }
  return loadPyodide as PyodideLoader;
}

function element(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`page is missing #${id}`);
  }
  return el;
}

async function main(): Promise<void> {
  const banner = document.getElementById("banner");
  try {
    const list = element("transcript");
    const versionEl = element("version");
    const [loadPyodide, wheelBytes] = await Promise.all([
      importLoader(PYODIDE_MODULE_URL),
      fetchWheel(WHEEL_URL),
    ]);
    const binding = await loadHostBinding({ loadPyodide, wheelBytes });
    const handle = binding.init(FIXTURE_CONFIG);
    const transcript = binding.runEpisode(handle, FIXTURE_TASK);
    renderTranscript(list, parseTranscript(transcript));
    renderVersion(versionEl, binding.version());
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    if (banner !== null) {
      showError(banner, message);
    } else {
      console.error(message);
    }
  }
}

void main();
