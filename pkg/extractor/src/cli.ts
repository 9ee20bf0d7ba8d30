#!/usr/bin/env node
// wbx-extract: embed a text file with a pretrained model and write WBX1.
//
//   wbx-extract extract --model <id> --in texts.tsv --out emb.wbx
//                       [--layer -1] [--batch 16] [--include-special]
//                       [--backend transformers|hash]
//
// The hash backend is a deterministic offline stand-in used by the tests.

import { HashBackend, type EmbeddingBackend } from "./backend.js";
import { runExtract } from "./extract.js";

interface Args {
  model?: string;
  in?: string;
  out?: string;
  layer: number;
  batch: number;
  backend: string;
  includeSpecial: boolean;
}

function parseArgs(argv: string[]): Args {
  const args: Args = {
    layer: -1,
    batch: 16,
    backend: "transformers",
    includeSpecial: false,
  };
  let i = 0;
  if (argv[i] === "extract") i += 1;
  for (; i < argv.length; i++) {
    const flag = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new Error(`${flag} needs a value`);
      return argv[i];
    };
    switch (flag) {
      case "--model":
        args.model = next();
        break;
      case "--in":
        args.in = next();
        break;
      case "--out":
        args.out = next();
        break;
      case "--layer":
        args.layer = Number(next());
        break;
      case "--batch":
        args.batch = Number(next());
        break;
      case "--backend":
        args.backend = next();
        break;
      case "--include-special":
        args.includeSpecial = true;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!args.in || !args.out) {
    throw new Error("extract needs --in and --out");
  }
  if (!Number.isInteger(args.batch) || args.batch < 1) {
    throw new Error(`--batch must be a positive integer, got ${args.batch}`);
  }
  return args;
}

async function makeBackend(args: Args): Promise<EmbeddingBackend> {
  if (args.backend === "hash") {
    return new HashBackend();
  }
  if (!args.model) {
    throw new Error("extract needs --model (or --backend hash)");
  }
  const { TransformersBackend } = await import("./transformers.js");
  return TransformersBackend.load(args.model, {
    includeSpecial: args.includeSpecial,
  });
}

async function main(): Promise<void> {
  let args: Args;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    process.exit(2);
  }
  try {
    const backend = await makeBackend(args);
    await runExtract(
      { input: args.in!, output: args.out!, layer: args.layer, batchSize: args.batch },
      backend,
    );
  } catch (err) {
    const message = (err as Error).message ?? String(err);
    if (/out of memory|OOM/i.test(message)) {
      process.stderr.write(`error: ${message}\nhint: retry with a smaller --batch\n`);
    } else {
      process.stderr.write(`error: ${message}\n`);
    }
    process.exit(1);
  }
}

main();
