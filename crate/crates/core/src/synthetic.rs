// Copyright 2026 The vrb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Seeded synthetic fixtures shaped like the real attraction data: a corpus
//! of CJK attraction records, matching knowledge entries, and a prompt set
//! whose prompts declare 1 to 4 features (mean 3).
//!
//! Everything here is generated from a single seed, so two calls with the
//! same [`SyntheticConfig`] return identical data.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    write_attractions, Attraction, CorpusError, KnowledgeEntry, KnowledgeSource, KnowledgeStore, Prompt,
    PromptSet,
};
use crate::textproc::TokenizerSpec;
use crate::vectorize::{save_embeddings, DenseVector, HashEmbedder};

/// Features a prompt can ask for; each is one or two CJK characters.
pub const FEATURES: &[&str] = &[
    "湖", "寺", "雪山", "草原", "温泉", "冰川", "峡谷", "古城", "经幡", "牦牛", "佛塔", "森林", "瀑布", "日出",
    "星空", "徒步", "花海", "宫殿", "壁画", "免费", "骑马", "摄影", "露营", "湿地", "候鸟", "民俗", "藏戏",
    "转经", "唐卡", "盐湖", "村落", "石窟", "古道", "神山", "桃花", "河谷", "冰湖", "牧场", "天葬", "酥油",
];

const SYLLABLES: &[&str] = &[
    "纳", "木", "错", "拉", "萨", "喀", "则", "芝", "南", "昌", "都", "那", "曲", "阿", "里", "巴", "松", "羊",
    "卓", "雍", "色", "格", "达", "扎", "贡", "嘎", "波", "密", "珠", "穆", "朗", "琼", "吉", "桑", "耶",
];

const SUFFIXES: &[&str] = &["湖", "寺", "山", "谷", "村", "宫", "园", "桥", "泉", "峰", "林", "庄园"];

const CITIES: &[(&str, &[&str])] = &[
    ("拉萨市", &["城关区", "堆龙德庆区", "达孜区", "林周县", "当雄县"]),
    ("日喀则市", &["桑珠孜区", "定日县", "江孜县", "萨迦县", "亚东县"]),
    ("林芝市", &["巴宜区", "米林市", "波密县", "察隅县", "工布江达县"]),
    ("山南市", &["乃东区", "琼结县", "桑耶县", "错那市", "浪卡子县"]),
    ("昌都市", &["卡若区", "八宿县", "左贡县", "芒康县"]),
    ("那曲市", &["色尼区", "班戈县", "申扎县", "尼玛县"]),
    ("阿里地区", &["噶尔县", "普兰县", "札达县", "日土县"]),
];

const FEATURE_SENTENCES: &[&str] = &[
    "这里以{f}闻名",
    "游客可以欣赏{f}",
    "景区内有{f}",
    "当地的{f}吸引了许多游客",
    "沿途能看到{f}",
    "{f}是这里的一大特色",
];

const PROMPT_TEMPLATES: &[(&str, &str)] = &[
    ("我想去一个有", "的地方"),
    ("推荐一个能看到", "的景点"),
    ("请帮我找一处有", "的景区"),
    ("有没有同时具备", "的去处"),
    ("想找个有", "的目的地"),
    ("哪里可以体验", "呢"),
];

const PROMPT_LEADS: &[&str] = &["", "周末", "假期", "带家人", "一个人", "和朋友", "下个月", "夏天", "秋天", "冬天"];

/// Sizes and seed of a synthetic fixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub n_attractions: usize,
    pub n_prompts: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_attractions: 563,
            n_prompts: 180,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub attractions: Vec<Attraction>,
    pub knowledge: Vec<KnowledgeEntry>,
    pub prompts: PromptSet,
}

fn fill(template: &str, feature: &str) -> String {
    template.replace("{f}", feature)
}

fn unique_name(rng: &mut ChaCha8Rng, taken: &mut HashSet<String>, id: usize) -> String {
    for _ in 0..32 {
        let len = rng.random_range(2..=3);
        let mut name: String = (0..len).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
        name.push_str(SUFFIXES.choose(rng).expect("non-empty"));
        if taken.insert(name.clone()) {
            return name;
        }
    }
    let name = format!("景点{id}");
    taken.insert(name.clone());
    name
}

fn attraction(rng: &mut ChaCha8Rng, id: usize, taken: &mut HashSet<String>) -> (Attraction, KnowledgeEntry) {
    let name = unique_name(rng, taken, id);
    let (city, districts) = CITIES.choose(rng).expect("non-empty");
    let district = *districts.choose(rng).expect("non-empty");
    let n_features = rng.random_range(3..=6);
    let features: Vec<&str> = FEATURES.choose_multiple(rng, n_features).copied().collect();
    let mut sentences: Vec<String> = features
        .iter()
        .map(|f| fill(FEATURE_SENTENCES.choose(rng).expect("non-empty"), f))
        .collect();
    let altitude = rng.random_range(28..=52) * 100;
    sentences.push(format!("{name}位于{city}{district}，海拔约{altitude}米"));
    let description = sentences.join("，") + "。";

    let century = rng.random_range(7..=19);
    let history = format!("{name}始建于公元{century}世纪，{}见证了当地的历史变迁。", features[0]);
    let geography = format!(
        "{name}位于{city}{district}境内，海拔约{altitude}米，周边有{}。",
        features[features.len() - 1]
    );
    let ticket = if features.contains(&"免费") || rng.random_bool(0.3) {
        "免费".to_string()
    } else {
        format!("{}元", rng.random_range(2..=20) * 10)
    };
    let a = Attraction {
        id,
        name,
        province: "西藏自治区".into(),
        city: (*city).into(),
        district: district.into(),
        address: format!("{city}{district}{}号", rng.random_range(1..=300)),
        distance: format!("{}km", rng.random_range(1..=1500)),
        popularity: rng.random_range(100..=100_000).to_string(),
        ticket_price: ticket,
        description,
        promotion: String::new(),
    };
    let k = KnowledgeEntry {
        attraction_id: id,
        history,
        geography,
        source: Some(KnowledgeSource::Fallback),
    };
    (a, k)
}

/// Feature counts 1..=4 with weights 1:2:3:4, which has mean exactly 3.
fn feature_count(rng: &mut ChaCha8Rng) -> usize {
    match rng.random_range(0..10) {
        0 => 1,
        1..=2 => 2,
        3..=5 => 3,
        _ => 4,
    }
}

fn prompt_text(rng: &mut ChaCha8Rng, features: &[&str]) -> String {
    let (head, tail) = PROMPT_TEMPLATES.choose(rng).expect("non-empty");
    let lead = PROMPT_LEADS.choose(rng).expect("non-empty");
    let list = match features {
        [] => String::new(),
        [one] => (*one).to_string(),
        [init @ .., last] => format!("{}和{last}", init.join("、")),
    };
    format!("{lead}{head}{list}{tail}")
}

pub fn generate(config: &SyntheticConfig) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut taken = HashSet::new();
    let (attractions, knowledge) = (0..config.n_attractions)
        .map(|id| attraction(&mut rng, id, &mut taken))
        .unzip();

    let mut texts = HashSet::new();
    let mut prompts = Vec::with_capacity(config.n_prompts);
    while prompts.len() < config.n_prompts {
        let n = feature_count(&mut rng);
        let mut features: Vec<&str> = FEATURES.choose_multiple(&mut rng, n).copied().collect();
        features.shuffle(&mut rng);
        let text = prompt_text(&mut rng, &features);
        if texts.insert(text.clone()) {
            prompts.push(Prompt {
                text,
                features: features.into_iter().map(String::from).collect(),
            });
        }
    }
    SyntheticData {
        attractions,
        knowledge,
        prompts: PromptSet::new(prompts).expect("generated prompts satisfy the feature bounds"),
    }
}

/// File names written by [`write_fixture`].
pub const ATTRACTIONS_FILE: &str = "attractions.csv";
pub const PROMPTS_FILE: &str = "prompts.json";
pub const KNOWLEDGE_FILE: &str = "knowledge.json";
pub const DOC_EMBEDDINGS_FILE: &str = "doc_embeddings.txt";
pub const QUERY_EMBEDDINGS_FILE: &str = "query_embeddings.txt";

/// Writes the corpus, prompts and knowledge store into `dir`, plus
/// hash-projection embeddings of dimension `embedding_dim` for documents
/// and prompts.
pub fn write_fixture(
    dir: impl AsRef<Path>,
    data: &SyntheticData,
    tokenizer: &TokenizerSpec,
    embedding_dim: usize,
    seed: u64,
) -> Result<(), CorpusError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write_attractions(dir.join(ATTRACTIONS_FILE), &data.attractions)?;
    data.prompts.save(dir.join(PROMPTS_FILE))?;
    KnowledgeStore::from_entries(data.knowledge.iter().cloned(), data.attractions.len())?
        .save(dir.join(KNOWLEDGE_FILE))?;

    let embedder = HashEmbedder::new(embedding_dim, seed, tokenizer.clone());
    let docs: Vec<DenseVector> = data
        .attractions
        .iter()
        .map(|a| embedder.embed(&a.document_text()))
        .collect();
    let queries: Vec<DenseVector> = data.prompts.iter().map(|p| embedder.embed(&p.text)).collect();
    for (file, rows) in [(DOC_EMBEDDINGS_FILE, &docs), (QUERY_EMBEDDINGS_FILE, &queries)] {
        let path = dir.join(file);
        save_embeddings(&path, embedding_dim, rows).map_err(|e| CorpusError::Io {
            path,
            source: std::io::Error::other(e.to_string()),
        })?;
    }
    Ok(())
}
