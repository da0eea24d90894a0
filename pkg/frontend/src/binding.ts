/**
 * Host binding over the runtime's portable interpreter build.
 *
 * The binding installs the runtime package archive into a freshly loaded
 * interpreter and exposes three entry points on top of it:
 * init(config text) -> handle, runEpisode(handle, task id) -> transcript
 * text, and version() -> text. This build runs scripted episodes with
 * local memory only; remote provider and memory calls are excluded.
 */

export interface PyodideRuntime {
  runPython(code: string): unknown;
  globals: unknown;
  unpackArchive(
    buffer: ArrayBuffer | Uint8Array,
    format: string,
    options?: { extractDir?: string },
  ): void;
}

/** Platform entry point that boots the interpreter (node or browser). */
export type PyodideLoader = () => Promise<PyodideRuntime>;

export interface HostBindingOptions {
  loadPyodide: PyodideLoader;
  /** The runtime package archive (a pure-Python wheel). */
  wheelBytes: Uint8Array;
}

export interface HostBinding {
  /** Parses and validates config text; returns a handle for later calls. */
  init(configText: string): number;
  /** Runs one scripted episode to completion; returns the transcript text. */
  runEpisode(handle: number, taskId: string): string;
  /** Version string of the installed runtime package. */
  version(): string;
}

const RUNTIME_SHIM = `
import io

import agentloop

_configs = {}


def host_init(config_text):
    path = "/tmp/host-config.toml"
    with open(path, "w", encoding="utf-8") as sink:
        sink.write(config_text)
    cfg = agentloop.load_config(path)
    cfg.validate()
    if cfg.provider != "scripted" or cfg.memory != "local":
        raise ValueError("this build runs scripted episodes with local memory only")
    handle = len(_configs) + 1
    _configs[handle] = cfg
    return handle


def host_run_episode(handle, task_id):
    if handle not in _configs:
        raise ValueError(f"unknown handle {handle!r}")
    cfg = _configs[handle]
    catalog, specs = agentloop.load_fixtures(cfg)
    matches = [spec for spec in specs if spec.id == task_id]
    if not matches:
        raise ValueError(f"unknown task {task_id!r}")
    sink = io.StringIO()
    agentloop.run_episode(cfg, matches[0], catalog=catalog, transcript=sink)
    return sink.getvalue()


def host_version():
    return agentloop.__version__
`;

type PyFunction = (...args: (string | number)[]) => unknown;

function globalFunction(pyodide: PyodideRuntime, name: string): PyFunction {
  // globals is a Python dict proxy; this cast is the one untyped FFI seam
  const globals = pyodide.globals as { get(name: string): unknown };
  const fn = globals.get(name);
  if (typeof fn !== "function") {
    throw new Error(`runtime shim did not define ${name}()`);
  }
  return fn as PyFunction;
}

function asNumber(value: unknown, context: string): number {
  if (typeof value !== "number") {
    throw new Error(`${context} returned ${typeof value}, expected a number`);
  }
  return value;
}

function asString(value: unknown, context: string): string {
  if (typeof value !== "string") {
    throw new Error(`${context} returned ${typeof value}, expected a string`);
  }
  return value;
}

export async function loadHostBinding(options: HostBindingOptions): Promise<HostBinding> {
  const pyodide = await options.loadPyodide();
  const sitePackages = asString(
    pyodide.runPython("import sysconfig; sysconfig.get_paths()['purelib']"),
    "site-packages lookup",
  );
  // node Buffers are Uint8Array subclasses the interpreter rejects; pass a plain view
  const wheel = new Uint8Array(
    options.wheelBytes.buffer,
    options.wheelBytes.byteOffset,
    options.wheelBytes.byteLength,
  );
  pyodide.unpackArchive(wheel, "wheel", { extractDir: sitePackages });
  pyodide.runPython(RUNTIME_SHIM);
  const init = globalFunction(pyodide, "host_init");
  const runEpisode = globalFunction(pyodide, "host_run_episode");
  const version = globalFunction(pyodide, "host_version");
  return {
    init: (configText) => asNumber(init(configText), "init"),
    runEpisode: (handle, taskId) => asString(runEpisode(handle, taskId), "runEpisode"),
    version: () => asString(version(), "version"),
  };
}
