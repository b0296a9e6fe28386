/**
 * Client-side twin of the service's token estimator, used to block
 * over-length claims before they cost a round trip. The counting rule is
 * the same one the server enforces: every CJK-width character is one
 * token, and every other run of non-whitespace characters is one token.
 */

// Ideographs, kana, hangul, CJK punctuation, and fullwidth forms all
// count one-per-character. Kept in sync with the server's ranges; a
// mismatch only means a claim is rejected by the wrong side, never lost.
const CJK_WIDE =
  "぀-ヿ" + // hiragana, katakana
  "㐀-䶿" + // CJK extension A
  "一-鿿" + // CJK unified ideographs
  "가-힯" + // hangul syllables
  "豈-﫿" + // CJK compatibility ideographs
  "、-〿" + // CJK symbols and punctuation
  "！-ﾟ"; // fullwidth forms, halfwidth katakana

const CJK_CHAR_RE = new RegExp("[" + CJK_WIDE + "]", "g");
const RUN_RE = new RegExp("[^\\s" + CJK_WIDE + "]+", "g");

export function estimateTokens(text: string): number {
  const cjk = text.match(CJK_CHAR_RE);
  const runs = text.match(RUN_RE);
  return (cjk ? cjk.length : 0) + (runs ? runs.length : 0);
}
