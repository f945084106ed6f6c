/**
 * Node bindings for the vproj CLI.
 *
 * Every call shells out to the CLI and parses its documented output, so the
 * numbers a binding returns are the CLI's numbers, byte for byte; no math is
 * reimplemented here. CLI data errors surface as VprojError with the CLI's
 * own diagnostic message.
 */

import { parseKeyValues, runVproj, VprojError } from "./runner.js";
import { readIndexHeader } from "./indexFile.js";

export { VprojError } from "./runner.js";
export { readIndexHeader, type IndexHeader } from "./indexFile.js";

export type EmbeddingsFormat = "text" | "bin";

export interface BuildParams {
  format?: EmbeddingsFormat;
  freqPath?: string;
  m?: number;
  m0?: number;
  efConstruction?: number;
  seed?: number;
}

/** Handle to a built index plus the embeddings file that names its tokens. */
export interface BoundIndex {
  indexPath: string;
  embeddingsPath: string;
  embeddingsFormat: EmbeddingsFormat;
  vocabSize: number;
  dim: number;
  u: number;
}

export interface QueryRow {
  rank: number;
  token: string;
  logit: number;
  prob: number;
  smoothedProb?: number;
  distEvals: number;
}

export interface QueryOptions {
  efSearch?: number;
  mode?: "graph" | "flat";
  smooth?: "none" | "consistent" | "laplacian" | "wta";
  epsilon?: number;
  epsilonFrac?: number;
  freqPath?: string;
}

export interface EvalSummary {
  raw: string;
  values: Map<string, string>;
  meanPrecision: number;
  flatPrecision: number;
  meanDistanceEvals: number;
  orderAgreementRate: number;
}

/** Build an index file from an embeddings file; returns the bound handle. */
export async function buildIndex(
  embeddingsPath: string,
  outPath: string,
  params: BuildParams = {},
): Promise<BoundIndex> {
  const args = ["build", "--embeddings", embeddingsPath, "--out", outPath];
  args.push("--format", params.format ?? "text");
  if (params.freqPath !== undefined) args.push("--freq", params.freqPath);
  if (params.m !== undefined) args.push("--M", String(params.m));
  if (params.m0 !== undefined) args.push("--m0", String(params.m0));
  if (params.efConstruction !== undefined) {
    args.push("--ef-construction", String(params.efConstruction));
  }
  if (params.seed !== undefined) args.push("--seed", String(params.seed));
  const summary = parseKeyValues(await runVproj(args));
  return {
    indexPath: outPath,
    embeddingsPath,
    embeddingsFormat: params.format ?? "text",
    vocabSize: Number(summary.get("vocab_size")),
    dim: Number(summary.get("dim")),
    u: Number(summary.get("U")),
  };
}

/** Bind an existing index file by reading its checksummed header. */
export async function openIndex(
  indexPath: string,
  embeddingsPath: string,
  format: EmbeddingsFormat = "text",
): Promise<BoundIndex> {
  const header = await readIndexHeader(indexPath);
  return {
    indexPath,
    embeddingsPath,
    embeddingsFormat: format,
    vocabSize: header.vocabSize,
    dim: header.dim,
    u: header.u,
  };
}

function queryArgs(index: BoundIndex, k: number, options: QueryOptions): string[] {
  const args = [
    "query",
    "--index",
    index.indexPath,
    "--embeddings",
    index.embeddingsPath,
    "--embeddings-format",
    index.embeddingsFormat,
    "--k",
    String(k),
  ];
  if (options.efSearch !== undefined) args.push("--ef-search", String(options.efSearch));
  if (options.mode !== undefined) args.push("--mode", options.mode);
  if (options.smooth !== undefined && options.smooth !== "none") {
    args.push("--smooth", options.smooth);
  }
  if (options.epsilon !== undefined) args.push("--epsilon", String(options.epsilon));
  if (options.epsilonFrac !== undefined) {
    args.push("--epsilon-frac", String(options.epsilonFrac));
  }
  if (options.freqPath !== undefined) args.push("--freq", options.freqPath);
  return args;
}

function parseQueryBlocks(stdout: string, smoothed: boolean): QueryRow[][] {
  const blocks: QueryRow[][] = [];
  let current: QueryRow[] | null = null;
  for (const line of stdout.split("\n")) {
    if (line.startsWith("# query")) {
      current = [];
      blocks.push(current);
      continue;
    }
    if (!line.trim() || line.startsWith("#")) continue;
    const fields = line.split("\t");
    if (current === null) {
      current = [];
      blocks.push(current);
    }
    const row: QueryRow = {
      rank: Number(fields[0]),
      token: fields[1],
      logit: Number(fields[2]),
      prob: Number(fields[3]),
      distEvals: Number(fields[fields.length - 1]),
    };
    if (smoothed) row.smoothedProb = Number(fields[4]);
    current.push(row);
  }
  return blocks;
}

/** Decode one context vector; rows arrive logit-descending. */
export async function query(
  index: BoundIndex,
  vector: number[],
  k: number,
  options: QueryOptions = {},
): Promise<QueryRow[]> {
  const args = queryArgs(index, k, options);
  args.push("--vector", vector.join(","));
  const stdout = await runVproj(args);
  const smoothed = options.smooth !== undefined && options.smooth !== "none";
  const blocks = parseQueryBlocks(stdout, smoothed);
  return blocks[0] ?? [];
}

/** Decode every vector in a queries file (one block per query). */
export async function queryFile(
  index: BoundIndex,
  queriesPath: string,
  k: number,
  options: QueryOptions = {},
): Promise<QueryRow[][]> {
  const args = queryArgs(index, k, options);
  args.push("--queries", queriesPath);
  const stdout = await runVproj(args);
  const smoothed = options.smooth !== undefined && options.smooth !== "none";
  return parseQueryBlocks(stdout, smoothed);
}

/** Evaluate graph retrieval against the oracle over a queries file. */
export async function evaluate(
  index: BoundIndex,
  queriesPath: string,
  k: number,
  efSearch: number,
): Promise<EvalSummary> {
  const stdout = await runVproj([
    "eval",
    "--index",
    index.indexPath,
    "--embeddings",
    index.embeddingsPath,
    "--embeddings-format",
    index.embeddingsFormat,
    "--queries",
    queriesPath,
    "--k",
    String(k),
    "--ef-search",
    String(efSearch),
    "--no-timing",
  ]);
  const values = parseKeyValues(stdout);
  const num = (key: string): number => {
    const raw = values.get(key);
    if (raw === undefined) {
      throw new VprojError(`eval summary is missing ${key}`, 1, stdout);
    }
    return Number(raw);
  };
  return {
    raw: stdout,
    values,
    meanPrecision: num("mean_precision_at_k"),
    flatPrecision: num("flat_precision_at_k"),
    meanDistanceEvals: num("mean_distance_evals"),
    orderAgreementRate: num("strict_order_agreement_rate"),
  };
}

/** Generate a synthetic dataset; returns the written file paths. */
export async function synthDataset(options: {
  vocab: number;
  dim: number;
  outPrefix: string;
  dist?: "gaussian" | "zipf";
  seed?: number;
  queries?: number;
  format?: EmbeddingsFormat;
}): Promise<{ embeddings: string; frequencies: string; queries: string }> {
  const args = [
    "synth",
    "--vocab",
    String(options.vocab),
    "--dim",
    String(options.dim),
    "--out-prefix",
    options.outPrefix,
  ];
  if (options.dist !== undefined) args.push("--dist", options.dist);
  if (options.seed !== undefined) args.push("--seed", String(options.seed));
  if (options.queries !== undefined) args.push("--queries", String(options.queries));
  if (options.format !== undefined) args.push("--format", options.format);
  const values = parseKeyValues(await runVproj(args));
  return {
    embeddings: values.get("embeddings") ?? "",
    frequencies: values.get("frequencies") ?? "",
    queries: values.get("queries") ?? "",
  };
}
