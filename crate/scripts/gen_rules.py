"""Writes the shipped grapheme-to-phoneme rule files (tab-separated)."""
import os
import sys

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "rules")

EN_INVENTORY = ("p b t d k g f v θ ð s z ʃ ʒ h tʃ dʒ m n ŋ l r w j "
                "æ ɛ ɪ ɒ ʌ ʊ ə i u ɑ ɔ ɜ eɪ aɪ ɔɪ aʊ oʊ")

EN_EXCEPTIONS = """
a ə|the ð ə|of ʌ v|to t u|and æ n d|in ɪ n|is ɪ z|you j u|that ð æ t|it ɪ t
he h i|was w ɒ z|for f ɔ r|on ɒ n|are ɑ r|as æ z|with w ɪ ð|his h ɪ z|they ð eɪ|i aɪ
at æ t|be b i|this ð ɪ s|have h æ v|from f r ʌ m|or ɔ r|one w ʌ n|had h æ d|by b aɪ|word w ɜ r d
but b ʌ t|not n ɒ t|what w ɒ t|all ɔ l|were w ɜ r|we w i|when w ɛ n|your j ɔ r|can k æ n|said s ɛ d
there ð ɛ r|use j u z|an æ n|each i tʃ|which w ɪ tʃ|she ʃ i|do d u|how h aʊ|their ð ɛ r|if ɪ f
will w ɪ l|up ʌ p|other ʌ ð ə r|about ə b aʊ t|out aʊ t|many m ɛ n i|then ð ɛ n|them ð ɛ m|these ð i z|so s oʊ
some s ʌ m|her h ɜ r|would w ʊ d|make m eɪ k|like l aɪ k|him h ɪ m|into ɪ n t u|time t aɪ m|has h æ z|look l ʊ k
two t u|more m ɔ r|write r aɪ t|go g oʊ|see s i|number n ʌ m b ə r|no n oʊ|way w eɪ|could k ʊ d|people p i p ə l
my m aɪ|than ð æ n|first f ɜ r s t|water w ɔ t ə r|been b ɪ n|call k ɔ l|who h u|oil ɔɪ l|its ɪ t s|now n aʊ
find f aɪ n d|long l ɒ ŋ|down d aʊ n|day d eɪ|did d ɪ d|get g ɛ t|come k ʌ m|made m eɪ d|may m eɪ|part p ɑ r t
over oʊ v ə r|new n u|sound s aʊ n d|take t eɪ k|only oʊ n l i|little l ɪ t ə l|know n oʊ|place p l eɪ s|year j ɪ r|live l ɪ v
me m i|back b æ k|give g ɪ v|most m oʊ s t|very v ɛ r i|after æ f t ə r|thing θ ɪ ŋ|our aʊ r|just dʒ ʌ s t|name n eɪ m
good g ʊ d|sentence s ɛ n t ə n s|man m æ n|think θ ɪ ŋ k|say s eɪ|great g r eɪ t|where w ɛ r|help h ɛ l p|through θ r u|much m ʌ tʃ
before b ɪ f ɔ r|line l aɪ n|right r aɪ t|too t u|mean m i n|old oʊ l d|any ɛ n i|same s eɪ m|tell t ɛ l|boy b ɔɪ
follow f ɒ l oʊ|came k eɪ m|want w ɒ n t|show ʃ oʊ|also ɔ l s oʊ|around ə r aʊ n d|form f ɔ r m|three θ r i|small s m ɔ l|set s ɛ t
put p ʊ t|end ɛ n d|does d ʌ z|another ə n ʌ ð ə r|well w ɛ l|large l ɑ r dʒ|must m ʌ s t|big b ɪ g|even i v ə n|such s ʌ tʃ
because b ɪ k ɒ z|turn t ɜ r n|here h ɪ r|why w aɪ|ask æ s k|went w ɛ n t|men m ɛ n|read r i d|need n i d|land l æ n d
different d ɪ f r ə n t|home h oʊ m|us ʌ s|move m u v|try t r aɪ|kind k aɪ n d|hand h æ n d|picture p ɪ k tʃ ə r|again ə g ɛ n|change tʃ eɪ n dʒ
off ɒ f|play p l eɪ|spell s p ɛ l|air ɛ r|away ə w eɪ|animal æ n ɪ m ə l|house h aʊ s|point p ɔɪ n t|page p eɪ dʒ|letter l ɛ t ə r
mother m ʌ ð ə r|answer æ n s ə r|found f aʊ n d|study s t ʌ d i|still s t ɪ l|learn l ɜ r n|should ʃ ʊ d|world w ɜ r l d|high h aɪ|every ɛ v r i
near n ɪ r|add æ d|food f u d|between b ɪ t w i n|own oʊ n|below b ɪ l oʊ|country k ʌ n t r i|plant p l æ n t|last l æ s t|school s k u l
father f ɑ ð ə r|keep k i p|tree t r i|never n ɛ v ə r|start s t ɑ r t|city s ɪ t i|earth ɜ r θ|eye aɪ|light l aɪ t|thought θ ɔ t
head h ɛ d|under ʌ n d ə r|story s t ɔ r i|saw s ɔ|left l ɛ f t|don d oʊ n|few f j u|while w aɪ l|along ə l ɒ ŋ|might m aɪ t
close k l oʊ z|something s ʌ m θ ɪ ŋ|seem s i m|next n ɛ k s t|hard h ɑ r d|open oʊ p ə n|example ɪ g z æ m p ə l|begin b ɪ g ɪ n|life l aɪ f|always ɔ l w eɪ z
love l ʌ v|heart h ɑ r t|night n aɪ t|dream d r i m|eyes aɪ z|death d ɛ θ|soul s oʊ l|sea s i|sky s k aɪ|god g ɒ d
though ð oʊ|tough t ʌ f|enough ɪ n ʌ f|women w ɪ m ɪ n|woman w ʊ m ə n|friend f r ɛ n d|once w ʌ n s|done d ʌ n|gone g ɒ n|none n ʌ n
shall ʃ æ l|thou ð aʊ|thee ð i|thy ð aɪ|ye j i|oh oʊ|o oʊ|ain eɪ n|t t|s z
""".strip()

EN_RULES = """
tch tʃ|tion ʃ ə n|sion ʒ ə n|ture tʃ ə r|ough ʌ f|augh ɔ|igh aɪ|gh |ch tʃ|sh ʃ
th θ|ph f|wh w|ck k|ng ŋ|qu k w|kn n|wr r|mb m|ee i
ea i|oo u|ou aʊ|ow aʊ|oa oʊ|oi ɔɪ|oy ɔɪ|ai eɪ|ay eɪ|au ɔ
aw ɔ|ie i|ey i|ew j u|ar ɑ r|or ɔ r|er ɜ r|ir ɜ r|ur ɜ r|e/$ 
c/e s|c/i s|c/y s|g/e dʒ|g/i dʒ|g/y dʒ|y/$ i|ll l|ss s|tt t
pp p|ff f|mm m|nn n|rr r|dd d|bb b|gg g|zz z|cc k
a æ|b b|c k|d d|e ɛ|f f|g g|h h|i ɪ|j dʒ
k k|l l|m m|n n|o ɒ|p p|q k|r r|s s|t t
u ʌ|v v|w w|x k s|y j|z z
""".strip()

RU_VOWELS = {"а": "a", "о": "o", "у": "u", "ы": "ɨ", "э": "e", "и": "i"}
RU_SOFT_VOWELS = {"я": "a", "ё": "o", "ю": "u", "е": "e"}
RU_CONSONANTS = {
    "б": "b", "в": "v", "г": "g", "д": "d", "з": "z", "к": "k", "л": "l", "м": "m",
    "н": "n", "п": "p", "р": "r", "с": "s", "т": "t", "ф": "f", "х": "x",
}
# Always hard or always soft regardless of context.
RU_FIXED = {"ж": "ʐ", "ш": "ʂ", "ц": "ts", "ч": "tʃʲ", "щ": "ɕː", "й": "j"}


def emit(path, inventory, exceptions, rules, header):
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# {header}\n")
        f.write("inventory: " + " ".join(inventory) + "\n")
        f.write("exceptions:\n")
        for word, out in exceptions:
            f.write(f"{word}\t{out}\n")
        f.write("rules:\n")
        for pat, out in rules:
            f.write(f"{pat}\t{out}\n")


def english():
    exceptions = []
    for item in EN_EXCEPTIONS.replace("\n", "|").split("|"):
        word, _, out = item.strip().partition(" ")
        exceptions.append((word, out.strip()))
    rules = []
    for item in EN_RULES.replace("\n", "|").split("|"):
        pat, _, out = item.partition(" ")
        rules.append((pat.strip(), out.strip()))
    emit(os.path.join(OUT, "english.g2p"), EN_INVENTORY.split(), exceptions, rules,
         "English heuristic grapheme-to-phoneme rules; specific patterns precede general ones.")
    return len(rules), len(exceptions)


def russian():
    inventory = set(RU_VOWELS.values()) | {"j"}
    rules = []
    for c, p in RU_CONSONANTS.items():
        inventory |= {p, p + "ʲ"}
        for v, vp in RU_SOFT_VOWELS.items():
            rules.append((c + v, f"{p}ʲ {vp}"))
        rules.append((f"{c}/ь", p + "ʲ"))
        rules.append((f"{c}/и", p + "ʲ"))
        rules.append((c, p))
    for c, p in RU_FIXED.items():
        inventory |= set(p.split())
        rules.append((c, p))
    for v, vp in RU_SOFT_VOWELS.items():
        rules.append((v, f"j {vp}"))
    for v, vp in RU_VOWELS.items():
        rules.append((v, vp))
    rules.append(("ь", ""))
    rules.append(("ъ", ""))
    exceptions = [("его", "j e v o"), ("что", "ʂ t o"), ("сегодня", "sʲ e v o dʲ nʲ a"),
                  ("конечно", "k o nʲ e ʂ n o"), ("скучно", "s k u ʂ n o")]
    emit(os.path.join(OUT, "russian.g2p"), sorted(inventory), exceptions, rules,
         "Russian near one-to-one rules; consonants palatalise before soft vowels and the soft sign.")
    return len(rules), len(exceptions)


if __name__ == "__main__":
    print("english", english(), file=sys.stderr)
    print("russian", russian(), file=sys.stderr)
