import { execFile } from "node:child_process";
import { mkdtemp, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";
import { afterAll, beforeAll, describe, expect, test } from "vitest";

import {
  buildIndex,
  evaluate,
  openIndex,
  query,
  queryFile,
  readIndexHeader,
  synthDataset,
  VprojError,
  type BoundIndex,
} from "../src/index.js";

const execFileAsync = promisify(execFile);
const VPROJ = process.env.VPROJ_BIN ?? "vproj";

/** Independent of the library's parser: run the CLI and keep raw output. */
async function rawCli(args: string[]): Promise<string> {
  const { stdout } = await execFileAsync(VPROJ, args, { maxBuffer: 1 << 28 });
  return stdout;
}

function rawDataRows(stdout: string): string[][] {
  return stdout
    .split("\n")
    .filter((line) => line.trim() && !line.startsWith("#"))
    .map((line) => line.split("\t"));
}

let dir: string;
let emb: string;
let freq: string;
let fixture: BoundIndex;

beforeAll(async () => {
  dir = await mkdtemp(join(tmpdir(), "vproj-bindings-"));
  emb = join(dir, "two.txt");
  await writeFile(emb, "2 1 1\napple 1.0 0.0\nbanana -1.0 0.5\n");
  freq = join(dir, "freq.txt");
  await writeFile(freq, "apple 3\nbanana 1\n");
  fixture = await buildIndex(emb, join(dir, "two.idx"), {
    m: 2,
    efConstruction: 4,
  });
}, 60_000);

afterAll(async () => {
  await rm(dir, { recursive: true, force: true });
});

describe("fixture queries", () => {
  test("build summary fields populate the handle", () => {
    expect(fixture.vocabSize).toBe(2);
    expect(fixture.dim).toBe(1);
    expect(fixture.u).toBeCloseTo(Math.sqrt(1.25), 8);
  });

  test("flat query returns the hand-computed logits", async () => {
    const rows = await query(fixture, [2], 2, { mode: "flat" });
    expect(rows.map((r) => r.token)).toEqual(["apple", "banana"]);
    expect(rows[0].logit).toBe(2);
    expect(rows[1].logit).toBe(-1.5);
    expect(rows[0].prob + rows[1].prob).toBeCloseTo(1, 8);
  });

  test("rows match a directly spawned CLI byte for byte", async () => {
    const rows = await query(fixture, [2], 2, { mode: "flat", efSearch: 2 });
    const raw = rawDataRows(
      await rawCli([
        "query",
        "--index",
        fixture.indexPath,
        "--embeddings",
        emb,
        "--embeddings-format",
        "text",
        "--k",
        "2",
        "--ef-search",
        "2",
        "--mode",
        "flat",
        "--vector",
        "2",
      ]),
    );
    expect(rows.length).toBe(raw.length);
    raw.forEach((fields, i) => {
      expect(rows[i].rank).toBe(Number(fields[0]));
      expect(rows[i].token).toBe(fields[1]);
      expect(rows[i].logit).toBe(Number(fields[2]));
      expect(rows[i].prob).toBe(Number(fields[3]));
      expect(rows[i].distEvals).toBe(Number(fields[4]));
    });
  });

  test("smoothed probabilities come through the smoothed column", async () => {
    const rows = await query(fixture, [2], 1, {
      mode: "flat",
      smooth: "consistent",
      epsilon: 0.5,
      freqPath: freq,
    });
    expect(rows[0].smoothedProb).toBeCloseTo(1 / 1.5, 8);
  });

  test("dimension mismatch surfaces the CLI diagnostic", async () => {
    let thrown: VprojError | undefined;
    try {
      await query(fixture, [2, 3], 1, { mode: "flat" });
    } catch (error) {
      thrown = error as VprojError;
    }
    expect(thrown).toBeInstanceOf(VprojError);
    expect(thrown!.exitCode).toBe(1);
    let cliStderr = "";
    try {
      await execFileAsync(VPROJ, [
        "query",
        "--index",
        fixture.indexPath,
        "--embeddings",
        emb,
        "--vector",
        "2,3",
        "--k",
        "1",
        "--mode",
        "flat",
      ]);
    } catch (error) {
      cliStderr = (error as { stderr: string }).stderr.trim();
    }
    expect(thrown!.message).toBe(cliStderr);
  });

  test("openIndex reads the same header the build reported", async () => {
    const opened = await openIndex(fixture.indexPath, emb, "text");
    expect(opened.vocabSize).toBe(fixture.vocabSize);
    expect(opened.dim).toBe(fixture.dim);
    expect(opened.u).toBeCloseTo(fixture.u, 8);
    const header = await readIndexHeader(fixture.indexPath);
    expect(header.boundMode).toBe("max_augmented_row_norm");
    expect(header.maxRowNorm).toBeCloseTo(header.u, 12);
  });
});

describe("synthetic dataset parity", () => {
  let index: BoundIndex;
  let files: { embeddings: string; frequencies: string; queries: string };

  beforeAll(async () => {
    files = await synthDataset({
      vocab: 800,
      dim: 16,
      seed: 7,
      queries: 40,
      outPrefix: join(dir, "ds"),
      format: "bin",
    });
    index = await buildIndex(files.embeddings, join(dir, "ds.idx"), {
      format: "bin",
      m: 8,
      efConstruction: 64,
      freqPath: files.frequencies,
    });
  }, 120_000);

  test("evaluate equals the CLI eval output exactly", async () => {
    const summary = await evaluate(index, files.queries, 10, 64);
    const raw = await rawCli([
      "eval",
      "--index",
      index.indexPath,
      "--embeddings",
      files.embeddings,
      "--embeddings-format",
      "bin",
      "--queries",
      files.queries,
      "--k",
      "10",
      "--ef-search",
      "64",
      "--no-timing",
    ]);
    expect(summary.raw).toBe(raw);
    expect(summary.flatPrecision).toBe(1);
    expect(summary.meanPrecision).toBeGreaterThan(0.9);
    expect(summary.meanDistanceEvals).toBeLessThan(800);
  }, 120_000);

  test("file queries agree with per-vector calls", async () => {
    const blocks = await queryFile(index, files.queries, 5, { efSearch: 32 });
    expect(blocks.length).toBe(40);
    for (const block of blocks) {
      expect(block.length).toBe(5);
      expect([...block].sort((a, b) => b.logit - a.logit)).toEqual(block);
    }
  }, 120_000);
});

describe("full-scale parity", () => {
  const enabled = process.env.VPROJ_PARITY_20K === "1";

  test.skipIf(!enabled)(
    "20k dataset: bindings equal CLI output",
    async () => {
      const files = await synthDataset({
        vocab: 20_000,
        dim: 64,
        seed: 42,
        queries: 50,
        outPrefix: join(dir, "big"),
        format: "bin",
      });
      const index = await buildIndex(files.embeddings, join(dir, "big.idx"), {
        format: "bin",
      });
      const summary = await evaluate(index, files.queries, 10, 128);
      const raw = await rawCli([
        "eval",
        "--index",
        index.indexPath,
        "--embeddings",
        files.embeddings,
        "--embeddings-format",
        "bin",
        "--queries",
        files.queries,
        "--k",
        "10",
        "--ef-search",
        "128",
        "--no-timing",
      ]);
      expect(summary.raw).toBe(raw);
      expect(summary.meanPrecision).toBeGreaterThanOrEqual(0.95);

      const blocks = await queryFile(index, files.queries, 10, { efSearch: 128 });
      const rawRows = rawDataRows(
        await rawCli([
          "query",
          "--index",
          index.indexPath,
          "--embeddings",
          files.embeddings,
          "--embeddings-format",
          "bin",
          "--queries",
          files.queries,
          "--k",
          "10",
          "--ef-search",
          "128",
        ]),
      );
      const flat = blocks.flat();
      expect(flat.length).toBe(rawRows.length);
      rawRows.forEach((fields, i) => {
        expect(flat[i].token).toBe(fields[1]);
        expect(flat[i].logit).toBe(Number(fields[2]));
        expect(flat[i].prob).toBe(Number(fields[3]));
      });
    },
    900_000,
  );
});
