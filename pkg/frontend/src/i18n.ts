/**
 * The localization table for every string the UI itself says. Verdict
 * content (labels, analysis, reference titles) is never translated here;
 * it is shown exactly as the API returned it.
 */

export type Lang = "en" | "zh";

const MESSAGES = {
  appTitle: {
    en: "Health Claim Check",
    zh: "健康信息核查",
  },
  appTagline: {
    en: "Paste a health claim, get a verdict with cited evidence.",
    zh: "粘贴一条健康信息，获取带引用依据的判定结果。",
  },
  claimLabel: {
    en: "Claim to check",
    zh: "待核查内容",
  },
  claimPlaceholder: {
    en: "e.g. Drinking hot lemon water cures colds",
    zh: "例如：喝热柠檬水能治感冒",
  },
  submit: {
    en: "Check claim",
    zh: "开始核查",
  },
  checking: {
    en: "Checking…",
    zh: "核查中…",
  },
  emptyClaim: {
    en: "Enter a claim first.",
    zh: "请先输入待核查内容。",
  },
  claimTooLong: {
    en: "Claim is about {count} tokens, over the limit of {max}.",
    zh: "内容约 {count} 个词元，超出上限 {max}。",
  },
  retrievalPanel: {
    en: "Retrieval settings",
    zh: "检索设置",
  },
  similarityThreshold: {
    en: "Similarity threshold",
    zh: "相似度阈值",
  },
  topK: {
    en: "Max references",
    zh: "最大引用数",
  },
  keywordDocs: {
    en: "Keyword documents",
    zh: "关键词召回文档数",
  },
  vectorChunks: {
    en: "Vector chunks",
    zh: "向量召回片段数",
  },
  defaultHint: {
    en: "default {value}",
    zh: "默认 {value}",
  },
  thresholdRange: {
    en: "Must be a number between -1 and 1.",
    zh: "必须是 -1 到 1 之间的数值。",
  },
  positiveInteger: {
    en: "Must be a whole number of 1 or more.",
    zh: "必须是不小于 1 的整数。",
  },
  fallbackNote: {
    en: "answered without references",
    zh: "未使用参考资料作答",
  },
  unparseableTitle: {
    en: "Model response could not be parsed",
    zh: "模型回复无法解析",
  },
  rawCompletionLabel: {
    en: "Raw model output",
    zh: "模型原始输出",
  },
  analysisHeading: {
    en: "Analysis",
    zh: "分析",
  },
  referencesHeading: {
    en: "References",
    zh: "参考资料",
  },
  openLink: {
    en: "open source",
    zh: "查看原文",
  },
  warningsHeading: {
    en: "Warnings",
    zh: "警告",
  },
  degradedHeading: {
    en: "Degraded stages",
    zh: "降级运行的阶段",
  },
  timingsHeading: {
    en: "Stage timings",
    zh: "阶段耗时",
  },
  stageRecall: {
    en: "recall",
    zh: "召回",
  },
  stageHypothesis: {
    en: "hypothesis",
    zh: "假设答案",
  },
  stageRerank: {
    en: "re-rank",
    zh: "重排序",
  },
  stageGeneration: {
    en: "generation",
    zh: "生成",
  },
  errorPrefix: {
    en: "Request failed",
    zh: "请求失败",
  },
  cancelled: {
    en: "Superseded by a newer request.",
    zh: "已被更新的请求取代。",
  },
  historyHeading: {
    en: "This session",
    zh: "本次会话记录",
  },
  historyEmpty: {
    en: "No checks yet.",
    zh: "尚无核查记录。",
  },
  historyOverrides: {
    en: "settings",
    zh: "参数",
  },
  historyDefaults: {
    en: "server defaults",
    zh: "服务端默认参数",
  },
  languageToggle: {
    en: "中文",
    zh: "English",
  },
  noLabel: {
    en: "no verdict",
    zh: "无判定",
  },
} as const;

export type MsgKey = keyof typeof MESSAGES;

let current: Lang = "en";

export function setLanguage(lang: Lang): void {
  current = lang;
}

export function getLanguage(): Lang {
  return current;
}

/** Look up a UI string, filling {name} slots from `subs`. */
export function t(key: MsgKey, subs?: Record<string, string | number>): string {
  let text: string = MESSAGES[key][current];
  if (subs) {
    for (const [name, value] of Object.entries(subs)) {
      text = text.split("{" + name + "}").join(String(value));
    }
  }
  return text;
}
