// Result delivery honoring the questionnaire's export target. On any
// upload failure with the fallback target, the exact CSV bytes go to a
// local file download together with the researcher-contact instruction.

import type { Session } from "./engine.js";
import { toCsvBytes } from "./csv.js";

export interface DeliveryHooks {
  upload: (bytes: Uint8Array) => Promise<{ ok: boolean; status: number }>;
  download: (bytes: Uint8Array, filename: string) => void;
  notify: (message: string) => void;
}

export interface DeliveryOutcome {
  mode: "uploaded" | "downloaded";
  bytes: Uint8Array;
}

export const FALLBACK_INSTRUCTION =
  "Upload failed. Your answers were saved to a file on this device - "
  + "please send it to the researchers per email.";

export async function finalizeAndDeliver(
  session: Session, target: string, hooks: DeliveryHooks,
): Promise<DeliveryOutcome> {
  const bytes = toCsvBytes(session);
  const filename = `${session.spec.spec_id}-${session.participantId}.csv`;
  if (target === "download") {
    hooks.download(bytes, filename);
    return { mode: "downloaded", bytes };
  }
  try {
    const response = await hooks.upload(bytes);
    if (response.ok) {
      return { mode: "uploaded", bytes };
    }
    throw new Error(`upload rejected with status ${response.status}`);
  } catch (exc) {
    if (target === "upload") {
      throw exc instanceof Error ? exc : new Error(String(exc));
    }
    hooks.download(bytes, filename);
    hooks.notify(FALLBACK_INSTRUCTION);
    return { mode: "downloaded", bytes };
  }
}
