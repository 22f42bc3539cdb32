// Questionnaire document types, mirroring the server's JSON wire format.
// The document arrives pre-validated from the server and is used as-is.

export interface ScaleSpec {
  variant:
    | "category_rating"
    | "visual_analogue"
    | "nasa_tlx"
    | "continuous_quality"
    | "free_text"
    | "free_hand"
    | "custom_svg";
  labels?: string[];
  min_label?: string;
  max_label?: string;
  dimension?: string;
  max_length?: number;
  width_px?: number;
  height_px?: number;
  svg_asset_id?: string;
  value_min?: number;
  value_max?: number;
}

export interface ItemSpec {
  item_id: string;
  question: string;
  required: boolean;
  scale: ScaleSpec;
}

export interface ScreenSpec {
  screen_id: string;
  kind: "items" | "wait" | "media" | "export" | "remote_command";
  items?: ItemSpec[];
  duration_ms?: number;
  asset_id?: string;
  autoplay?: boolean;
  preload?: boolean;
  target?: string;
  command?: string;
}

export interface Condition {
  item_id: string;
  comparator: "eq" | "ne" | "lt" | "le" | "gt" | "ge" | "answered" | "unanswered";
  literal: string | number | null;
}

export interface RoutingRule {
  after_screen: string;
  condition: Condition;
  goto_screen: string;
  priority: number;
}

export interface AssetRef {
  asset_id: string;
  media_type: string;
  uri: string;
  preload: boolean;
}

export interface QuestionnaireDoc {
  spec_id: string;
  version: string;
  title: string;
  screens: ScreenSpec[];
  routing?: RoutingRule[];
  assets?: AssetRef[];
}

export interface PreloadEntry {
  asset_id: string;
  media_type: string;
  uri: string;
}

/** Server reply to GET /questionnaire. */
export interface QuestionnaireEnvelope {
  participant: string;
  index: number;
  total: number;
  spec_digest: string;
  spec: QuestionnaireDoc;
  preload: PreloadEntry[];
}

export function allItems(spec: QuestionnaireDoc): ItemSpec[] {
  const out: ItemSpec[] = [];
  for (const screen of spec.screens) {
    if (screen.kind === "items" && screen.items) out.push(...screen.items);
  }
  return out;
}

export function findAsset(spec: QuestionnaireDoc, assetId: string): AssetRef | undefined {
  return (spec.assets ?? []).find((a) => a.asset_id === assetId);
}
