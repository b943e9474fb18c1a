#!/usr/bin/env node
/**
 * CLI: render one or more figure specs.
 *
 *   nfsim-figs [--data DIR] [--outdir DIR] spec1.txt [spec2.txt ...]
 *
 * CSV paths inside a spec resolve against --data (default: the spec file's
 * directory); outputs go to --outdir (default: same base).
 */

import { renderFigureFile } from "./render.js";

function main(argv: string[]): number {
  const specs: string[] = [];
  let dataDir: string | undefined;
  let outDir: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--data") dataDir = argv[++i];
    else if (a === "--outdir") outDir = argv[++i];
    else if (a === "--help" || a === "-h") {
      console.log("usage: nfsim-figs [--data DIR] [--outdir DIR] SPEC...");
      return 0;
    } else specs.push(a);
  }
  if (specs.length === 0) {
    console.error("error: no figure specs given (try --help)");
    return 2;
  }
  let failed = 0;
  for (const spec of specs) {
    try {
      const res = renderFigureFile(spec, dataDir, outDir);
      console.log(`${spec} -> ${res.outputPath} (${res.bytes} bytes)`);
    } catch (err) {
      console.error(`error: ${spec}: ${(err as Error).message}`);
      failed++;
    }
  }
  return failed === 0 ? 0 : 1;
}

process.exit(main(process.argv.slice(2)));
