import { execFile } from "node:child_process";

/** Error carrying the CLI's single-line diagnostic and exit code. */
export class VprojError extends Error {
  constructor(
    message: string,
    public readonly exitCode: number,
    public readonly stderr: string,
  ) {
    super(message);
    this.name = "VprojError";
  }
}

const MAX_BUFFER = 256 * 1024 * 1024;

/** Binary to invoke; override with VPROJ_BIN for non-PATH installs. */
export function vprojBinary(): string {
  return process.env.VPROJ_BIN ?? "vproj";
}

/** Run one vproj subcommand and return its stdout. */
export function runVproj(args: string[]): Promise<string> {
  return new Promise((resolve, reject) => {
    execFile(
      vprojBinary(),
      args,
      { maxBuffer: MAX_BUFFER },
      (error, stdout, stderr) => {
        if (error) {
          const code =
            typeof error.code === "number" ? error.code : error.code === undefined ? 1 : 1;
          const diagnostic = stderr.trim().split("\n").filter(Boolean).pop() ?? error.message;
          reject(new VprojError(diagnostic, code, stderr));
          return;
        }
        resolve(stdout);
      },
    );
  });
}

/** Parse a flat `key: value` block into a string map. */
export function parseKeyValues(text: string): Map<string, string> {
  const out = new Map<string, string>();
  for (const line of text.split("\n")) {
    const sep = line.indexOf(": ");
    if (sep > 0) {
      out.set(line.slice(0, sep), line.slice(sep + 2).trim());
    }
  }
  return out;
}
